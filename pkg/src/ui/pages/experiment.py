"""
Experiment page: edit, validate and run a batch document.
"""
import logging
from dataclasses import replace
from pathlib import Path

import streamlit as st

from src.logic import config_loader
from src.logic.errors import ConfigError
from src.logic.experiment import expand_runs, run_experiment
from src.ui.components import error_page

logger = logging.getLogger(__name__)


def _initial_document() -> str:
    path = Path(config_loader.get_experiment_path(config_loader.load_config()))
    try:
        return path.read_text(encoding="utf-8")
    except OSError as e:
        logger.warning(f"Could not read {path}: {e}; starting from an empty document")
        return ""


def render():
    """Render the experiment page."""
    st.title("📊 Experiment")

    if "experiment_text" not in st.session_state:
        st.session_state.experiment_text = _initial_document()
    text = st.text_area("Experiment document (YAML)", key="experiment_text", height=360)

    try:
        experiment = config_loader.parse_config(text)
    except ConfigError as e:
        error_page.render_config_error(e)
        return

    runs = expand_runs(experiment)
    sweep = f"sweep over {experiment.sweep.key}" if experiment.sweep else "no sweep"
    st.success(f"Valid: {len(runs)} runs ({sweep}, {len(experiment.seeds)} seeds)")

    col1, col2 = st.columns(2)
    with col1:
        output_dir = st.text_input("Output directory", value=experiment.output_dir)
    with col2:
        workers = st.number_input("Workers", min_value=1, max_value=32, value=experiment.workers)

    if not st.button("Run experiment", type="primary"):
        return

    experiment = replace(experiment, output_dir=output_dir, workers=int(workers))
    with st.spinner(f"Running {len(runs)} runs..."):
        result = run_experiment(experiment)

    if result.failed:
        st.warning(f"{len(result.failed)} run(s) failed; see manifest.json")
    for problem in result.io_errors:
        st.error(problem)

    st.subheader("Aggregate")
    st.dataframe(result.aggregate, use_container_width=True, hide_index=True)
    with st.expander("Per-run summary"):
        st.dataframe(result.summary, use_container_width=True, hide_index=True)

    st.download_button(
        "Download aggregate CSV",
        data=result.aggregate.to_csv(index=False, float_format="%.9g", lineterminator="\n"),
        file_name="aggregate.csv",
        mime="text/csv",
    )
    st.caption(f"Artifacts written to {result.output_dir}")
