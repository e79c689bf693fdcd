"""
Entry script of the H-Swarm workbench, run by `hswarm ui` through `streamlit run`.
"""
import sys
from pathlib import Path

import streamlit as st

# streamlit run only puts src/ui on the path
sys.path.insert(0, str(Path(__file__).resolve().parents[2]))

from src.logic import config_loader, logger  # noqa: E402
from src.ui import sidebar  # noqa: E402

logger.setup_logging(stream=sys.stdout)

config = config_loader.load_config()

CHROME_CSS = """
<style>
[data-testid="stSidebarNav"], [data-testid="stToolbar"], #MainMenu, footer {
    display: none;
}
</style>
"""


def main():
    st.set_page_config(
        page_title=config_loader.get_app_title(config),
        page_icon="🛰️",
        layout="wide",
        initial_sidebar_state="expanded",
    )
    st.markdown(CHROME_CSS, unsafe_allow_html=True)

    page = sidebar.render_sidebar(config)
    if page is None:
        st.error("config/app.yaml defines no pages")
        return
    sidebar.load_and_render_page(page)


if __name__ == "__main__":
    main()
