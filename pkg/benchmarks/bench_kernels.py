"""Compare the compiled kernels with the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--no-end-to-end]

Kernel timings use inputs captured from a fuzz schedule on the 9-server
overlay; the end-to-end timing runs the exhaustive 3-server, f=0 search in a
subprocess per backend.
"""

import argparse
import itertools
import os
import subprocess
import sys
import timeit

from allconcur import _kernels_py, checker, kernels
from allconcur import protocol as P
from allconcur.overlay import make_circulant
from allconcur.state import Config

END_TO_END = (
    "import time; from allconcur import checker, kernels; "
    "from allconcur.overlay import complete_digraph; from allconcur.state import Config; "
    "t = time.perf_counter(); r = checker.explore_exhaustive(Config(complete_digraph(3), 0)); "
    "print(kernels.BACKEND, r.stats['states'], time.perf_counter() - t)"
)


def sample_inputs():
    """Kernel arguments from the first server that tracks a failed root."""
    config = Config(make_circulant(9, [1, 2, 4]), 2)
    n, succ = config.n, config.G.succ_mask
    found = None
    for i in itertools.count():
        state = P.init(config)
        for action in checker.run_schedule(config, checker.schedule_seed(1, i)).actions:
            state = P.apply(state, action)
            s = state.servers[action.p]
            for t in range(n):
                if found is None and s.F[t] and not s.g[t].is_empty:
                    found = s, t
        if found:
            break
    s, t = found
    o = (s.F[t] & -s.F[t]).bit_length() - 1
    return {
        "td_build": (n, t, s.F, succ),
        "td_update": (n, 1 << t, (0,) * n, t, o, t, s.F, succ),
        "server_violations": (n, s.M, s.F, s.g, succ),
        "fingerprint": (state.key(),),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--number", type=int, default=2000)
    parser.add_argument("--no-end-to-end", action="store_true")
    args = parser.parse_args(argv)

    if kernels.BACKEND != "cython":
        print("compiled kernels not built; only the fallback is available", file=sys.stderr)
        return 1
    inputs = sample_inputs()
    print(f"{'kernel':20s} {'cython us':>10s} {'python us':>10s} {'speedup':>8s}")
    for name, call_args in inputs.items():
        fast, slow = getattr(kernels, name), getattr(_kernels_py, name)
        assert fast(*call_args) == slow(*call_args), name
        t_fast = min(timeit.repeat(lambda: fast(*call_args), number=args.number, repeat=args.repeat)) / args.number
        t_slow = min(timeit.repeat(lambda: slow(*call_args), number=args.number, repeat=args.repeat)) / args.number
        print(f"{name:20s} {t_fast * 1e6:10.2f} {t_slow * 1e6:10.2f} {t_slow / t_fast:7.1f}x")

    if not args.no_end_to_end:
        print("\nexhaustive K3, f=0 (backend, states, seconds)")
        for pure in ("", "1"):
            env = dict(os.environ, ALLCONCUR_PURE_PYTHON=pure)
            out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
            print(" ", out.stdout.strip())
    return 0


if __name__ == "__main__":
    sys.exit(main())
