"""Benchmark the compiled kernel backend against the numpy fallback.

The backend is chosen at import time, so each side runs in a fresh
subprocess: the fallback side sets QRADON_FORCE_FALLBACK=1.  Both sides
evaluate the same theta-sum workload; the script reports wall times, the
speedup, and the worst cross-backend value deviation.

Usage:  python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import json
import os
import subprocess
import sys

_WORKER = r"""
import json, sys, time
import qradon
from qradon.quadform import QuadraticForm
from qradon.theta import theta_direct

repeats = int(sys.argv[1])
X2 = QuadraticForm(((2,),))
HEX = QuadraticForm(((2, 1), (1, 2)))
cases = [
    ("k=1, y=2^-16", X2, 2.0**-16, 0.3, (0.2,)),
    ("k=1, y=2^-20", X2, 2.0**-20, 1/3 + 1e-7, (0.1,)),
    ("k=2, y=2^-12", HEX, 2.0**-12, 0.3, (0.2, 0.7)),
    ("k=2, y=2^-16", HEX, 2.0**-16, 1/3 + 1e-7, (0.1, 0.6)),
]
out = {"backend": qradon.BACKEND, "cases": {}}
for name, form, y, theta, phi in cases:
    theta_direct(form, y, theta, phi)  # warm caches
    t0 = time.perf_counter()
    for _ in range(repeats):
        val = theta_direct(form, y, theta, phi).value
    dt = (time.perf_counter() - t0) / repeats
    out["cases"][name] = {"time_s": dt, "re": val.real, "im": val.imag}
print(json.dumps(out))
"""


def _run(force_fallback: bool, repeats: int) -> dict:
    env = dict(os.environ)
    if force_fallback:
        env["QRADON_FORCE_FALLBACK"] = "1"
    else:
        env.pop("QRADON_FORCE_FALLBACK", None)
    proc = subprocess.run(
        [sys.executable, "-c", _WORKER, str(repeats)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(proc.stdout)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    compiled = _run(False, args.repeats)
    fallback = _run(True, args.repeats)
    if compiled["backend"] != "compiled":
        print("warning: compiled backend unavailable; comparing fallback "
              "against itself")

    header = f"{'case':<16} {'compiled':>12} {'fallback':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    worst = 0.0
    for name, c in compiled["cases"].items():
        f = fallback["cases"][name]
        dev = abs(complex(c["re"], c["im"]) - complex(f["re"], f["im"]))
        worst = max(worst, dev)
        print(
            f"{name:<16} {c['time_s'] * 1e3:>10.2f}ms {f['time_s'] * 1e3:>10.2f}ms "
            f"{f['time_s'] / c['time_s']:>8.1f}x"
        )
    print(f"\nworst cross-backend deviation: {worst:.2e}")
    if worst > 1e-9:
        raise SystemExit("backends disagree beyond tolerance")


if __name__ == "__main__":
    main()
