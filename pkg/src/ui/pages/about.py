"""
About page - model summary and command-line usage.
"""
import streamlit as st

from src.ui.sidebar import get_app_version


def render():
    """Render the About page."""
    st.title("ℹ️ About")
    st.markdown(f"**hswarm-sim** v{get_app_version()}")

    st.markdown("""
    ### Model

    - **Arena**: rectangle, 8 m × 8 m by default, discrete time with dt = 1 s.
    - **BMAVs** follow velocity commands with speed-proportional actuation noise and
      keep a Gaussian belief by integrating the commanded velocity.
    - **AMAVs** are unicycles with a forward sector sensor (120°, 1 m) measuring range
      and bearing; each sighting corrects the BMAV's belief with an extended Kalman filter.
    - Every δ seconds the BMAVs are grouped by nearest AMAV and each AMAV searches
      a depth-δ tree of motion primitives for the sequence that minimizes the summed
      covariance trace of its group, pruning redundant branches with the ε/σ rules.

    ### Command line

    ```
    hswarm validate --config config/experiment.yaml
    hswarm run --config config/experiment.yaml --out results --seeds 1,2,3 --workers 4
    hswarm oracle --planner-bruteforce --config config/experiment.yaml
    hswarm ui
    ```

    `HSWARM_OUTPUT_DIR` overrides the document's output directory; `--out` overrides both.

    ### Artifacts

    - `traces/<run>.csv`: t, kind, id, x, y, heading, est_x, est_y, trace_sigma, observed_by
    - `summary.csv`: one row per run with ATE and success rates on the accuracy × time grid
    - `aggregate.csv`: mean and std per strategy and sweep value
    - `manifest.json`: the resolved configuration and seed of every artifact

    ### License

    MIT License.
    """)
