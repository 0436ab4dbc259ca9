"""Build the extension, import it, and exercise the main entry points.

    python3 python/smoke_test.py

Pass --no-build to reuse an existing target/release/libpycorrtree.so.
"""

import importlib.util
import math
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def build():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "corrtree-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )


def load(tmp):
    lib = ROOT / "target" / "release" / "libpycorrtree.so"
    dst = pathlib.Path(tmp) / "pycorrtree.so"
    shutil.copy(lib, dst)
    spec = importlib.util.spec_from_file_location("pycorrtree", dst)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def check(ct, tmp):
    assert abs(ct.rho_to_distance(0.68) - 0.8) < 1e-12
    assert abs(ct.rho_to_distance(0.72) - 0.75) < 0.005

    y = ct.generate(groups=3, size=10, loading=0.8, noise=0.6, length=1000, seed=4)
    assert y.shape == (1000, 30) and y.kind == "log-return"

    c = y.correlation()
    census = c.census()
    assert census["n"] == 30
    assert census["strong"] + census["weak"] + census["negative"] == 435

    try:
        import numpy as np
    except ImportError:
        np = None
    if np is not None:
        want = np.corrcoef(np.array(y.columns()))
        assert np.allclose(np.array(c.to_list()), want, atol=1e-12)

    d = c.distance()
    assert d.check_axioms() == []
    tree = d.mst()
    assert len(tree.edges) == 29
    groups = [[f"G{g}_{k:02d}" for k in range(1, 11)] for g in range(1, 4)]
    assert all(tree.is_connected_subtree(g) for g in groups)
    assert sum(tree.degrees().values()) == 58

    dg = d.single_linkage()
    coph = dg.cophenetic()
    ultra = tree.ultrametric()
    assert all(abs(a - b) <= 1e-12 for ra, rb in zip(coph, ultra) for a, b in zip(ra, rb))
    assert len(dg.cut(dg.heights[-1] - 1e-12)) == 2
    assert dg.to_newick().endswith(":0.0;")
    assert tree.to_dot().count(" -- ") == 29
    assert tree.to_graphml().count("<edge ") == 29

    # construction trace on a hand-built matrix
    labels = ["AXP", "C", "GE", "JPM"]
    rho = {("C", "JPM"): 0.72, ("AXP", "C"): 0.68, ("AXP", "JPM"): 0.65, ("AXP", "GE"): 0.61,
           ("C", "GE"): 0.1, ("GE", "JPM"): 0.2}
    rows = [[1.0 if a == b else rho.get((a, b), rho.get((b, a))) for b in labels] for a in labels]
    _, steps = ct.build_mst_trace(ct.CorrelationMatrix(labels, rows).distance())
    assert [(a, b, ok) for a, b, _, ok in steps[:4]] == [
        ("C", "JPM", True), ("AXP", "C", True), ("AXP", "JPM", False), ("AXP", "GE", True)]

    # prices, rebase round trip, rolling windows
    prices = ct.to_prices(y.slice(0, 300))
    assert prices.shape == (301, 30)
    back = prices.rebase("G1_01", "USD").rebase("USD", "G1_01")
    orig = dict(zip(prices.assets, zip(*prices.rows())))
    for label, col in zip(back.assets, zip(*back.rows())):
        assert all(math.isclose(a, b, rel_tol=1e-12) for a, b in zip(col, orig[label]))
    windows, trees = ct.rolling_trees(y, width=250, step=250)
    assert windows == [(0, 250), (250, 500), (500, 750), (750, 1000)]
    assert 0.0 <= ct.edge_survival(trees[0], trees[1]) <= 1.0
    assert trees[0].survival(trees[0]) == 1.0

    # missing values travel as None
    p = ct.Panel(["A", "B", "C"], [[1.0, 2.0, None], [2.0, 1.0, 3.0]])
    assert p.rows()[0][2] is None

    try:
        ct.Panel(["A", "A"], [[1.0, 2.0]])
    except ct.CorrtreeError:
        pass
    else:
        raise AssertionError("duplicate labels accepted")

    # end-to-end pipeline from a file
    csv = pathlib.Path(tmp) / "panel.csv"
    csv.write_text(
        "time," + ",".join(prices.assets) + "\n"
        + "".join(f"{t}," + ",".join(repr(v) for v in row) + "\n"
                  for t, row in zip(prices.timestamps, prices.rows()))
    )
    out = pathlib.Path(tmp) / "out"
    census, written = ct.run_pipeline(str(csv), str(out), formats=["dot", "newick"], width=100, step=100)
    assert census["n"] == 30
    names = sorted(pathlib.Path(w).relative_to(out).as_posix() for w in written)
    assert "mst.dot" in names and "survival.csv" in names and "windows/0002.nwk" in names
    loaded = ct.Panel.load(str(csv))
    assert loaded.shape == prices.shape


def main():
    if "--no-build" not in sys.argv:
        build()
    with tempfile.TemporaryDirectory() as tmp:
        check(load(tmp), tmp)
    print("python smoke test: ok")


if __name__ == "__main__":
    main()
