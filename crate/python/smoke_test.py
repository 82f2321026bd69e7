"""Smoke test for the symsq Python extension.

Build the extension with `cargo build -p symsq-py --release` (or without
--release), then run `python3 python/smoke_test.py`. The script copies the
shared library cargo produced to a temporary `symsq_py.so` and imports it.
"""

import importlib
import json
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"


def load_extension():
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libsymsq_py.so"
        if lib.exists():
            break
    else:
        sys.exit("libsymsq_py.so not found; run `cargo build -p symsq-py` first")
    tmp = Path(tempfile.mkdtemp())
    shutil.copy(lib, tmp / "symsq_py.so")
    sys.path.insert(0, str(tmp))
    return importlib.import_module("symsq_py")


def main():
    sq = load_extension()

    chi = sq.Character("quad:-4")
    assert chi.conductor() == 4 and chi.parity() == 1 and chi.is_primitive()
    re3, im3 = chi.value(3)
    assert abs(re3 + 1) < 1e-12 and abs(im3) < 1e-12
    assert (chi * chi).exact_value(3) == "1"

    x = sq.Padic(2, 5, 20, den=3)
    y = sq.Padic(3, 5, 20)
    assert (x * y).agrees(sq.Padic(2, 5, 20), 20)
    assert sq.Padic(25, 5, 20).valuation() == 2

    f = sq.Newform.load(str(CORPUS / "11a.json"))
    assert f.label == "11a" and f.level == 11 and f.bad_primes() == [11]
    triv = sq.Character("trivial")
    assert f.route_difference(triv, 200) is None
    assert f.rankin_check(sq.Character("quad:-3"), 100) is None

    report = json.loads(f.trivial_zero_json(11))
    assert report["g"] == 1
    tate = json.loads(f.l_invariant_json(11))["tate"]
    assert tate["ord_q"] == 5

    re, im, err = f.completed_l(triv, 1.5, 2.0)
    assert err < 1e-6

    kl = json.loads(sq.kubota_leopoldt_json(chi, 5, digits=10, terms=10))
    assert len(kl["values"]) == 5

    assert sq.hecke_fe_residual(sq.Character("quad:5"), 0.3, 0.7) < 1e-10
    assert sq.base_change_holds(12, 4)

    code, out, _ = sq.run_cli(["selftest", "--quick", "--corpus", str(CORPUS)])
    assert code == 0 and json.loads(out)["status"] == "pass"
    code, _, err_text = sq.run_cli(["kl", "--char", "bogus"])
    assert code == 1 and err_text

    print("python smoke test passed")


if __name__ == "__main__":
    main()
