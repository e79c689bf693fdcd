"""
Home page - what the workbench does and the default setting.
"""
import pandas as pd
import streamlit as st

from src.logic.config_loader import config_to_dict
from src.logic.simulator import SimConfig


def _defaults_table() -> pd.DataFrame:
    doc = config_to_dict(SimConfig())
    rows = []
    for section in ("simulation", "fov", "motion_noise", "observation_noise", "planner", "navigation"):
        for key, value in doc[section].items():
            if key == "obstacles":
                continue
            rows.append({"section": section, "key": key, "value": str(value)})
    return pd.DataFrame(rows)


def render():
    """Render the home page."""
    st.title("🛰️ H-Swarm Workbench")

    st.markdown("""
    A deterministic 2-D simulator for heterogeneous micro aerial vehicle swarms.
    A few **AMAVs** with accurate self-localization fly non-myopic schedules so that
    their sensors keep re-observing the **BMAVs**, which only dead-reckon.

    - **Single Run** simulates one seed and shows the localization error per BMAV.
    - **Experiment** edits, validates and runs a batch document (sweeps × seeds)
      and writes the same CSV/JSON artifacts as `hswarm run`.

    Strategies: `hswarm` (mobile AMAVs), `station` (static AMAVs) and
    `dead_reckoning` (no AMAVs).
    """)

    st.markdown("---")
    st.subheader("Default setting")
    st.dataframe(_defaults_table(), use_container_width=True, hide_index=True)
