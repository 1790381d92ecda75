"""Common files.

model/ : dataclass shim shared by parameter and result models
util/  : cavityms utilities (logging, tables, serialization, configs)

"""
