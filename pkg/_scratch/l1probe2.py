import numpy as np, time, faulthandler
faulthandler.dump_traceback_later(110, exit=True)
import vlcsparse.dca as dca_mod
from vlcsparse import OuterConfig, gen_random_vlcs, RandomVlcsSpec, initial_point
from vlcsparse.errors import NonconvergenceError
import vlcsparse.inner as inn

spec = RandomVlcsSpec(m=50, n=100, nnz=30, s_active=30, overlap=10, seed=1)
prob, xt = gen_random_vlcs(spec)
x0 = initial_point(prob)

orig = inn.solve_canonical
record = {}
def traced(model, y0, tol=1e-8, max_iter=60000, warm=None, opts=None):
    t0 = time.time()
    try:
        r = orig(model, y0, tol=tol, max_iter=max_iter, warm=warm, opts=opts)
        dt = time.time()-t0
        if dt > 0.5: print(f"  slow OK solve: mu={model.al_mu:.3e} rho={model.al_rho:.3e} tol={tol:.1e} t={dt:.1f}s kkt={r.kkt_residual:.1e}", flush=True)
        return r
    except NonconvergenceError as e:
        dt = time.time()-t0
        print(f"  FAIL solve: mu={model.al_mu:.3e} rho={model.al_rho:.3e} tol={tol:.1e} t={dt:.1f}s best={e.residual:.2e}", flush=True)
        if "m" not in record:
            record["m"] = model; record["y0"] = np.array(y0)
            np.save('_scratch/fail_y0.npy', np.array(y0))
            import pickle
            with open('_scratch/fail_model.pkl','wb') as fh: pickle.dump(model, fh)
        raise
dca_mod.solve_canonical = traced

from vlcsparse import run_alm, AlmConfig
try:
    x, tr = run_alm(prob, sigma=1e-8, nu=0.004, x_init=x0, cfg=AlmConfig(), x_feas=x0, mode="l1")
    print("alm done", tr.converged)
except Exception as e:
    print("alm err:", type(e).__name__, e)
