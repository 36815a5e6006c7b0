"""Builds the Rust extension module with cargo and installs it as
`outer_dynamics_py`.  Use `pip install -e . --no-build-isolation`."""

import pathlib
import shutil
import subprocess
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

ROOT = pathlib.Path(__file__).resolve().parent


class CargoExtension(Extension):
    def __init__(self, name: str, package: str) -> None:
        super().__init__(name, sources=[])
        self.package = package


class cargo_build_ext(build_ext):
    def build_extension(self, ext: Extension) -> None:
        subprocess.check_call(
            ["cargo", "build", "--release", "-p", ext.package], cwd=ROOT
        )
        stem = ext.name.split(".")[-1]
        if sys.platform == "darwin":
            built = ROOT / "target" / "release" / f"lib{stem}.dylib"
        elif sys.platform.startswith("win"):
            built = ROOT / "target" / "release" / f"{stem}.dll"
        else:
            built = ROOT / "target" / "release" / f"lib{stem}.so"
        dest = pathlib.Path(self.get_ext_fullpath(ext.name))
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built, dest)


setup(
    ext_modules=[CargoExtension("outer_dynamics_py", "od-py")],
    cmdclass={"build_ext": cargo_build_ext},
)
