import numpy as np, time, faulthandler
faulthandler.dump_traceback_later(420, exit=True)
from vlcsparse import solve_sparse, OuterConfig, gen_random_vlcs, RandomVlcsSpec, initial_point, evaluate_gh

seed = 1
spec = RandomVlcsSpec(m=50, n=100, nnz=30, s_active=30, overlap=10, seed=seed)
prob, xt = gen_random_vlcs(spec)
t0 = time.time()
x0 = initial_point(prob)
print(f"x0: comp={evaluate_gh(prob, x0)[2]:.3e} t={time.time()-t0:.1f}s", flush=True)
t0 = time.time()
rep = solve_sparse(prob, OuterConfig(nu_final=0.004, K=20), x_true=xt, x0=x0)
print(f"capped zeros={rep.zeros_recovered} matched={rep.matched_zeros} res={rep.res:.1e} conv={rep.converged} k={rep.outer_iters} [{time.time()-t0:.1f}s]")
for r in rep.trace: print("   ", {k:(f"{v:.3g}" if isinstance(v,float) else v) for k,v in r.items()}, flush=True)
