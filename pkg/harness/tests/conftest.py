import subprocess
import sys

import pytest

from fusionharness import load_paired_dataset, make_toy_dataset, read_manifest


@pytest.fixture(scope="session")
def toy_root(tmp_path_factory):
    """The bundled 60-image synthetic set plus its enhanced counterpart.

    Enhancement goes through the batch CLI of the enhancement package, the
    only surface the harness is allowed to consume.
    """
    root = tmp_path_factory.mktemp("toy")
    manifest = make_toy_dataset(root)
    proc = subprocess.run(
        [
            sys.executable,
            "-m",
            "cxrphase.cli",
            "batch",
            str(manifest),
            "--out",
            str(root / "enh"),
            "--working-size",
            "64",
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return root


@pytest.fixture(scope="session")
def toy_manifest(toy_root):
    return toy_root / "manifest.csv"


@pytest.fixture(scope="session")
def toy_entries(toy_manifest):
    return read_manifest(toy_manifest)


@pytest.fixture(scope="session")
def toy_dataset(toy_root, toy_manifest):
    return load_paired_dataset(toy_manifest, toy_root / "enh" / "mf")
