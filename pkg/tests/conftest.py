import numpy as np
import pytest

from msa.model import Element, Model, Node, Restraint

# filled by test_acceptance, printed at the end of the session
ACCEPTANCE_RESULTS = []


def random_model(rng, n_elements=None):
    """A random valid 2D model: mixed element kinds, random supports."""
    if n_elements is None:
        n_elements = int(rng.integers(5, 51))
    n_nodes = int(rng.integers(3, max(4, n_elements // 2 + 3)))
    pts = rng.uniform(0.0, 10.0, size=(n_nodes, 2))
    # well separated points keep element lengths away from zero
    pts += np.arange(n_nodes)[:, None] * np.array([0.37, 0.0])
    nodes = [Node(i + 1, float(x), float(y)) for i, (x, y) in enumerate(pts)]
    kinds = ["spring", "bar", "beam2d"]
    elements = []
    for eid in range(1, n_elements + 1):
        a, b = rng.choice(n_nodes, size=2, replace=False) + 1
        kind = kinds[int(rng.integers(0, 3))]
        if kind == "spring":
            props = {"k": float(rng.uniform(1.0, 100.0))}
        elif kind == "bar":
            props = {"ea": float(rng.uniform(1.0, 100.0))}
        else:
            props = {"ea": float(rng.uniform(1.0, 100.0)), "ei": float(rng.uniform(1.0, 100.0))}
        elements.append(Element(eid, kind, (int(a), int(b)), props))
    restraints = []
    for nid in rng.choice(n_nodes, size=max(1, n_nodes // 4), replace=False) + 1:
        k = int(rng.integers(1, 4))
        fixed = tuple(sorted(rng.choice(["ux", "uy", "rz"], size=k, replace=False),
                             key=["ux", "uy", "rz"].index))
        restraints.append(Restraint(int(nid), fixed))
    return Model(tuple(nodes), tuple(elements), tuple(restraints))


def random_sparse_psd(n, rng, density=None):
    """Sparse symmetric positive definite matrix ``B^T B + D`` as a dense array."""
    import scipy.sparse as sps
    if density is None:
        density = min(1.0, 3.0 / n)
    B = sps.random(n, n, density=density, random_state=rng, format="csr")
    A = (B.T @ B).toarray() + np.diag(rng.uniform(0.1, 1.0, size=n))
    return 0.5 * (A + A.T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion (see ``pytest_terminal_summary``)."""
    marker = request.node.get_closest_marker("criterion")
    yield
    rep = getattr(request.node, "rep_call", None)
    status = "PASS" if rep is not None and rep.passed else "FAIL"
    num, text = marker.args
    line = f"criterion {num}: {status}  {text}"
    ACCEPTANCE_RESULTS.append(line)
    print(line)
