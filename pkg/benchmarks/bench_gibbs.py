#!/usr/bin/env python3
"""Benchmark the numba Gibbs kernel against the pure-Python twin.

The two kernels run the identical arithmetic on the identical random
stream, so besides timing, this script double-checks that their chains
agree bit for bit on a small instance.

    python benchmarks/bench_gibbs.py            # default sizes
    python benchmarks/bench_gibbs.py --quick    # smaller corpus, fewer sweeps
"""

import argparse
import time

import numpy as np

from topicbench import CorpusSpec, generate_corpus, run_gibbs
from topicbench._accel import HAVE_NUMBA
from topicbench.gibbs import GibbsConfig


def time_run(corpus, config, accelerated, sweeps):
    cfg = GibbsConfig(
        num_topics=config.num_topics, alpha=config.alpha, beta=config.beta,
        sweeps=sweeps, seed=config.seed,
    )
    t0 = time.perf_counter()
    run_gibbs(corpus, cfg, accelerated=accelerated)
    return time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--docs", type=int, default=None)
    ap.add_argument("--sweeps", type=int, default=None)
    args = ap.parse_args()

    docs = args.docs or (200 if args.quick else 2000)
    sweeps = args.sweeps or (20 if args.quick else 100)
    py_sweeps = max(1, sweeps // 20)

    spec = CorpusSpec(
        num_topics=10, num_documents=docs, doc_length=100, vocab_size=1000,
        structure_word=0.7, structure_doc=0.7, seed=7,
    )
    print(f"corpus: D={docs} m=100 V=1000 K=10 ({docs * 100} tokens)")
    corpus = generate_corpus(spec)
    config = GibbsConfig(num_topics=10, alpha=0.5, beta=0.01, sweeps=sweeps, seed=3)

    if not HAVE_NUMBA:
        print("numba unavailable; timing the pure-Python kernel only")
    else:
        # Equality check: same seed, both kernels, small budget.
        small = GibbsConfig(num_topics=10, alpha=0.5, beta=0.01, sweeps=3, seed=3)
        a = run_gibbs(corpus, small, accelerated=True).token_labels.labels
        b = run_gibbs(corpus, small, accelerated=False).token_labels.labels
        assert np.array_equal(a, b), "kernel paths diverged"
        print("kernel agreement: numba and pure-Python chains identical")

        time_run(corpus, config, True, 1)  # warm the JIT cache
        t_nb = time_run(corpus, config, True, sweeps)
        print(f"numba:  {sweeps:5d} sweeps in {t_nb:7.2f} s "
              f"({1e3 * t_nb / sweeps:7.2f} ms/sweep)")

    t_py = time_run(corpus, config, False, py_sweeps)
    print(f"python: {py_sweeps:5d} sweeps in {t_py:7.2f} s "
          f"({1e3 * t_py / py_sweeps:7.2f} ms/sweep)")
    if HAVE_NUMBA:
        print(f"speedup: {t_py / py_sweeps / (t_nb / sweeps):.0f}x per sweep")


if __name__ == "__main__":
    main()
