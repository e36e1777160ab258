import os
import subprocess

import pytest

wsi = pytest.importorskip("wsi")


def test_write_skew_per_policy():
    for level, second in (("si", True), ("wsi", False)):
        engine = wsi.Engine(level)
        engine.begin().commit()
        t1, t2 = engine.begin(), engine.begin()
        t1.read("x")
        t2.read("y")
        t1.write("y", "1")
        t2.write("x", "1")
        assert t1.commit() is not None
        assert (t2.commit() is not None) == second


def test_snapshot_reads_and_own_writes():
    engine = wsi.Engine()
    t = engine.begin()
    t.write("k", "a")
    assert t.commit() is not None
    reader = engine.begin()
    writer = engine.begin()
    writer.write("k", "b")
    assert writer.read("k") == "b"
    assert writer.commit() is not None
    assert reader.read("k") == "a"
    assert reader.read_only
    assert reader.commit() is not None


def test_history_checks():
    assert wsi.check("r1[x] w2[x] w1[x] c1 c2") == "SI:txn2-aborted WSI:admissible SER:yes witness=(1,2)"
    assert wsi.replay("r1[x] r2[y] w1[y] w2[x] c1 c2", "wsi") == {1: "committed", 2: "aborted"}
    assert wsi.is_serializable("r1[x] r2[y] w1[y] w2[x] c1 c2") == (False, None)
    assert wsi.construct_serial("r1[x] w2[x] w1[x] c1 c2") == "r1[x] w1[x] c1 w2[x] c2"
    with pytest.raises(wsi.ParseError):
        wsi.check("r1[x] q2[y]")


def test_workload_and_bench():
    m = wsi.run_workload(keys=1000, clients=2, txns=500, dist="zipfian", level="si")
    assert m["valid"]
    assert m["committed"] + m["aborted"] == 500
    assert m["read_only_aborted"] == 0
    b = wsi.bench_oracle(level="wsi", requests=2000)
    assert b["decisions"] == 2000


def test_recover_after_logged_run(tmp_path):
    path = tmp_path / "run.wal"
    m = wsi.run_workload(keys=50, txns=200, wal_path=path)
    state = wsi.recover(path)
    assert state["committed"] + state["aborted"] > 0
    assert state["reserved_upto"] > 0


@pytest.mark.skipif("WSI_BINARY" not in os.environ, reason="CLI path not provided")
def test_cli_check(tmp_path):
    hist = tmp_path / "h.txt"
    hist.write_text("r1[x] r2[y] w1[y] w2[x] c1 c2\n")
    out = subprocess.run([os.environ["WSI_BINARY"], "check", str(hist)], capture_output=True, text=True)
    assert out.returncode == 0
    assert out.stdout == "SI:admissible WSI:txn2-aborted SER:no\n"
