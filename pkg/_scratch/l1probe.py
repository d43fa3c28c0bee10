import numpy as np, time, faulthandler
faulthandler.dump_traceback_later(100, exit=True)
from vlcsparse import OuterConfig, gen_random_vlcs, RandomVlcsSpec, initial_point, evaluate_gh, run_alm, AlmConfig

spec = RandomVlcsSpec(m=50, n=100, nnz=30, s_active=30, overlap=10, seed=1)
prob, xt = gen_random_vlcs(spec)
t0 = time.time()
x0 = initial_point(prob)
print(f"x0 t={time.time()-t0:.1f}s comp={evaluate_gh(prob, x0)[2]:.2e}", flush=True)
t0 = time.time()
x, tr = run_alm(prob, sigma=1e-8, nu=0.004, x_init=x0, cfg=AlmConfig(), x_feas=x0, mode="l1")
print(f"alm l1: t={time.time()-t0:.1f}s conv={tr.converged} iters={len(tr.mu)} resid={tr.residual}", flush=True)
