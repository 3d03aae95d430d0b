from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

CORE_SOURCES = [
    "src/csv.cpp",
    "src/corpus.cpp",
    "src/normalize.cpp",
    "src/features.cpp",
    "src/metrics.cpp",
    "src/linear_models.cpp",
    "src/transformer.cpp",
    "src/serialize.cpp",
    "src/model_io.cpp",
    "src/pipeline.cpp",
    "src/server.cpp",
]

setup(
    ext_modules=[
        Pybind11Extension(
            "issuekit._core",
            ["python/bindings.cpp"] + CORE_SOURCES,
            include_dirs=["include", "vendor"],
            cxx_std=20,
        )
    ],
    cmdclass={"build_ext": build_ext},
)
