import pytest

from sggnn.io import write_dataset
from sggnn.synthetic import heterophilic_sbm


@pytest.fixture
def toy_manifest(tmp_path):
    """A 40-node heterophilic two-class dataset written to disk with its splits."""
    ds = heterophilic_sbm(n_per_class=20, n_classes=2, seed=0)
    return write_dataset(ds, tmp_path / "data", name="toy")


@pytest.fixture
def run_file(tmp_path, toy_manifest):
    """Write a run configuration next to the dataset; returns a factory for variants."""

    def make(models='["gcn", "gcn@role_knn", "sg-global", "sg-node"]', seeds="[0, 1]",
             output="out", extra=""):
        text = (f'dataset = "data/{toy_manifest.name}"\n'
                f'output = "{output}"\n'
                f"seeds = {seeds}\n"
                f"models = {models}\n"
                "model.epochs = 15\n"
                'recipe.a.source = "role"\n'
                'recipe.a.method = "knn"\n'
                "recipe.a.k = 3\n"
                'recipe.b.source = "features"\n'
                'recipe.b.method = "ball"\n'
                "recipe.b.eps_quantile = 0.1\n" + extra)
        path = tmp_path / f"run_{output.replace('/', '_')}.cfg"
        path.write_text(text)
        return path

    return make


# --- acceptance verdicts ------------------------------------------------------------

_VERDICTS: dict = {}


@pytest.fixture
def verdict():
    """Record one PASS/FAIL/SKIP line per acceptance criterion; also printed at the end."""

    def record(number, status, detail):
        line = f"criterion {number}: {status} - {detail}"
        _VERDICTS[number] = line
        print(line)
        return status == "PASS"

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(_VERDICTS):
            terminalreporter.write_line(_VERDICTS[key])
