"""
Single-run page: simulate one seed and inspect the per-BMAV errors.
"""
import logging
from dataclasses import replace

import pandas as pd
import streamlit as st

from src.logic.errors import ConfigError
from src.logic.metrics import summarize
from src.logic.simulator import Mission, SimConfig, Strategy, run_simulation
from src.ui.components import error_page

logger = logging.getLogger(__name__)


def _form() -> SimConfig:
    base = SimConfig()
    col1, col2, col3 = st.columns(3)
    with col1:
        strategy = st.selectbox("Strategy", [s.value for s in Strategy])
        mission = st.selectbox("Mission", [m.value for m in Mission])
    with col2:
        n_amav = st.number_input("AMAVs", min_value=1, max_value=12, value=base.n_amav)
        n_bmav = st.number_input("BMAVs", min_value=1, max_value=40, value=base.n_bmav)
    with col3:
        duration = st.number_input("Duration (s)", min_value=1.0, value=base.duration, step=60.0)
        seed = st.number_input("Seed", min_value=0, value=1)
    epsilon = st.slider("Pruning epsilon", min_value=0.0, max_value=2.0, value=base.prune.epsilon, step=0.1)
    return replace(
        base,
        strategy=Strategy(strategy),
        mission=Mission(mission),
        n_amav=int(n_amav),
        n_bmav=int(n_bmav),
        duration=float(duration),
        master_seed=int(seed),
        prune=replace(base.prune, epsilon=float(epsilon)),
    )


def render():
    """Render the single-run page."""
    st.title("🛰️ Single Run")
    cfg = _form()

    if not st.button("Run simulation", type="primary"):
        return

    try:
        with st.spinner("Simulating..."):
            record = run_simulation(cfg)
            metrics = summarize(record)
    except ConfigError as e:
        error_page.render_config_error(e)
        return

    arrived = sum(t is not None for t in record.arrival_times)
    col1, col2, col3, col4 = st.columns(4)
    col1.metric("Mean ATE (m)", f"{metrics.mean_ate:.3f}")
    col2.metric("Max ATE (m)", f"{metrics.max_ate:.3f}")
    col3.metric("Pooled mean error (m)", f"{metrics.mean_error:.3f}")
    col4.metric("Arrived", f"{arrived}/{record.n_bmav}")

    st.subheader("Per-BMAV")
    per_bmav = pd.DataFrame({
        "bmav": range(record.n_bmav),
        "ate": metrics.per_bmav_ate,
        "destination_x": [q.x for q in record.destinations],
        "destination_y": [q.y for q in record.destinations],
        "arrival_t": record.arrival_times,
    })
    st.dataframe(per_bmav, use_container_width=True, hide_index=True)

    if metrics.planner_ms_median is not None:
        st.caption(
            f"Planner: median {metrics.planner_ms_median:.1f} ms, "
            f"p95 {metrics.planner_ms_p95:.1f} ms over {len(record.planner_ms)} invocations"
        )

    csv = record.to_frame().to_csv(index=False, float_format="%.9g", lineterminator="\n")
    st.download_button(
        "Download trace CSV",
        data=csv,
        file_name=f"trace_{cfg.strategy.value}_seed{cfg.master_seed}.csv",
        mime="text/csv",
    )
