import pandas as pd

from src.bounds import Dims, bound_decay
from src.plots import plot_bound_decay, plot_sweep


def _frame():
    rows = []
    for run_id, (n, alpha) in enumerate([(1, 2.0), (2, 2.0), (1, 1.5), (2, 1.5)]):
        rows.append(dict(run_id=run_id, n=n, alpha=alpha, eps_emp=0.4, theta_emp=0.1,
                         erasure_err=0.3 / n, marginal_err=0.1, decon_err=0.3 / n,
                         chain_bound_emp=2.0, error=None))
    rows.append(dict(run_id=4, n=3, alpha=2.0, error="CapacityError: too big"))
    return pd.DataFrame(rows)


def test_plot_sweep_writes_pngs(tmp_path):
    paths = plot_sweep(_frame(), tmp_path / "plots")
    names = sorted(p.name for p in paths)
    assert names == ["chain_slack_hist.png", "errors_vs_n_alpha1.5.png", "errors_vs_n_alpha2.png"]
    assert all(p.stat().st_size > 0 for p in paths)


def test_plot_bound_decay(tmp_path):
    profile = bound_decay(2.0, 0.5, Dims(2, 2, 2, 2), 0.4, -0.3, extra=10)
    path = plot_bound_decay(profile, tmp_path)
    assert path.exists()
