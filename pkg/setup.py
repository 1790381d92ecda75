"""Setup cavityms."""

import json
import os
from pathlib import Path
from subprocess import CalledProcessError, check_output

from setuptools import Command, find_packages, setup
from setuptools.command.build_py import build_py as org_build_py
from setuptools.command.develop import develop as org_develop
from setuptools.command.sdist import sdist as org_sdist

README = Path(__file__).parent / "README.md"

with open(README, "r", encoding="utf8") as fh:
    long_description = fh.read()


def check_git_outputs(*args: str) -> str:
    output = check_output(["git", *args])
    return output.decode("utf-8").strip()


class checkpoint(Command):
    """Record the git branch, commit and timestamp for `cavityms --version`."""

    user_options = []

    def initialize_options(self):
        pass

    def finalize_options(self):
        pass

    def run(self):
        try:
            git_branch = check_git_outputs("rev-parse", "--abbrev-ref", "HEAD")
            git_commit = check_git_outputs("rev-list", "-1", "HEAD")
            git_timestamp = check_git_outputs("show", "-s", "--format=%ci", git_commit)

            ckpt_dict = {
                "git_branch": git_branch,
                "git_commit": git_commit,
                "git_timestamp": git_timestamp,
            }

            file = Path(__file__).parent / "cavityms/checkpoint.json"
            with open(file, "w") as f:
                json.dump(ckpt_dict, f)

        except (CalledProcessError, OSError):
            if "NO_GIT_INFO" not in os.environ:
                raise


class build_py(org_build_py):
    def run(self):
        self.run_command("checkpoint")
        super().run()


class sdist(org_sdist):
    def run(self):
        self.run_command("checkpoint")
        super().run()


class develop(org_develop):
    def run(self):
        self.run_command("checkpoint")
        super().run()


COMMON_DEPS = [
    "typing_extensions",
    "termcolor>=1.1.0",
    "mashumaro>=3.0",
    "tabulate>=0.8.6",
    "pydantic>=1.8.2,<2",
    "typer>=0.9,<0.26",
    "click>=8.0",
    "rich>=10.9.0",
    "numpy>=1.22",
    "scipy>=1.8",
    "matplotlib>=3.5",
]

TEST_DEPS = [
    "pytest>=7",
]


setup(
    name="cavityms",
    version="0.1.0",
    description="Mølmer–Sørensen gates in cavity QED: effective models, dynamics and fidelities",
    long_description=long_description,
    long_description_content_type="text/markdown",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    python_requires=">=3.9",
    packages=find_packages(
        exclude=(
            "tests",
            "tests.*",
        )
    ),
    cmdclass={
        "build_py": build_py,
        "sdist": sdist,
        "develop": develop,
        "checkpoint": checkpoint,
    },
    entry_points={
        "console_scripts": [
            "cavityms = cavityms.cli:main",
        ]
    },
    include_package_data=True,
    install_requires=COMMON_DEPS,
    extras_require={"test": TEST_DEPS},
)
