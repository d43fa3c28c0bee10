import numpy as np, time
from vlcsparse import solve_sparse, OuterConfig, gen_random_vlcs, RandomVlcsSpec, baseline_l1

for seed in (1, 2, 3, 4, 5):
    spec = RandomVlcsSpec(m=50, n=100, nnz=30, s_active=30, overlap=10, seed=seed)
    prob, xt = gen_random_vlcs(spec)
    t0 = time.time()
    rep = solve_sparse(prob, OuterConfig(nu_final=0.004, K=20), x_true=xt)
    t1 = time.time()
    repl1 = baseline_l1(prob, OuterConfig(nu_final=0.004, K=20), x_true=xt)
    t2 = time.time()
    print(f"seed {seed}: capped zeros={rep.zeros_recovered:3d} matched={rep.matched_zeros:3d} res={rep.res:.1e} "
          f"conv={rep.converged} k={rep.outer_iters} [{t1-t0:.1f}s] | "
          f"l1 zeros={repl1.zeros_recovered:3d} matched={repl1.matched_zeros:3d} res={repl1.res:.1e} conv={repl1.converged} [{t2-t1:.1f}s]",
          flush=True)
