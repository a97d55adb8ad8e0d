import pandas as pd

ERROR_COLS = ("eps_emp", "theta_emp", "erasure_err", "marginal_err", "decon_err")


def summarise_records(frame: pd.DataFrame) -> pd.DataFrame:
    """
    Per (n, alpha) grid point: run counts, mean/max of each measured error,
    the worst chain slack (chain_bound_emp - erasure_err, smaller is tighter)
    and the share of runs whose theoretical bounds are vacuous.
    Failed runs (non-empty `error`) are counted but left out of the statistics.
    """
    frame = frame.copy()
    for c in ERROR_COLS + ("chain_bound_emp", "log2_F", "log2_M"):
        frame[c] = pd.to_numeric(frame[c], errors="coerce")
    failed = frame["error"].notna() if "error" in frame else pd.Series(False, index=frame.index)
    frame["failed"] = failed.astype(int)
    frame["chain_slack"] = frame["chain_bound_emp"] - frame["erasure_err"]
    frame["vacuous"] = (frame["vacuous_flag"].astype(str).str.lower() == "true").astype(int)

    ok = frame[~failed]
    counts = frame.groupby(["n", "alpha"]).agg(
        runs=("run_id", "count"),
        failed=("failed", "sum"),
    )
    stats = ok.groupby(["n", "alpha"]).agg(
        **{f"mean_{c}": (c, "mean") for c in ERROR_COLS},
        **{f"max_{c}": (c, "max") for c in ERROR_COLS},
        worst_chain_slack=("chain_slack", "min"),
        vacuous_share=("vacuous", "mean"),
        mean_log2_F=("log2_F", "mean"),
        mean_log2_M=("log2_M", "mean"),
    )
    return counts.join(stats, how="left").reset_index()
