import pytest

from fairtree import synthetic_two_color, write_csv


@pytest.fixture(scope="session")
def synth_csv(tmp_path_factory):
    """A census-style 1:7 two-color CSV, 512 rows."""
    path = tmp_path_factory.mktemp("data") / "synth.csv"
    ds = synthetic_two_color(512, 1 / 8, seed=1234)
    write_csv(ds, path, color_names={1: "blue", 2: "red"})
    return str(path)
