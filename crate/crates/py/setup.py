"""Builds the Rust extension with cargo directly.

The usual Rust build backends aren't assumed to be installed; cargo is
enough: compile the cdylib, then copy it to wherever setuptools expects the
extension module.
"""

import json
import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

CRATE_DIR = Path(__file__).resolve().parent


class CargoExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class cargo_build_ext(build_ext):
    def build_extension(self, ext):
        subprocess.run(
            ["cargo", "build", "--release", "-p", "rfdgraph-py"],
            cwd=CRATE_DIR,
            check=True,
        )
        meta = json.loads(
            subprocess.run(
                ["cargo", "metadata", "--format-version", "1", "--no-deps"],
                cwd=CRATE_DIR,
                check=True,
                capture_output=True,
            ).stdout
        )
        target = Path(meta["target_directory"]) / "release"
        if sys.platform == "darwin":
            built = target / "librfdgraph_py.dylib"
        elif sys.platform == "win32":
            built = target / "rfdgraph_py.dll"
        else:
            built = target / "librfdgraph_py.so"
        out = Path(self.get_ext_fullpath(ext.name))
        out.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(built, out)


setup(
    ext_modules=[CargoExtension("rfdgraph_py")],
    cmdclass={"build_ext": cargo_build_ext},
)
