"""Defines base exceptions for cavityms."""


class BaseCavityMSException(Exception):
    """Cavity MS error.

    All cavityms exceptions inherit this class.
    """


##########
# CLI    #
##########
class BaseCLIException(BaseCavityMSException):
    """Cavity MS CLI error."""


class UnknownScenarioException(BaseCLIException):
    """The requested figure or table is not known to the CLI."""
