"""
Workbench sidebar: menu from config/app.yaml, experiment document status, version.
"""
import importlib
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import streamlit as st
import toml

from src.logic import config_loader
from src.logic.errors import ConfigError

logger = logging.getLogger(__name__)

PYPROJECT = Path(__file__).resolve().parents[2] / "pyproject.toml"


def get_app_version() -> str:
    """Version declared in pyproject.toml, or 0.0.0 when it can't be read."""
    try:
        return toml.load(PYPROJECT)["project"]["version"]
    except (OSError, KeyError, toml.TomlDecodeError) as e:
        logger.warning(f"No version in {PYPROJECT}: {e}")
        return "0.0.0"


def render_sidebar(config: Dict[str, Any]) -> Optional[str]:
    """
    Render the menu and the status of the configured experiment document.

    Args:
        config: Workbench configuration dictionary

    Returns:
        Module path of the selected page, or None when the menu is empty
    """
    with st.sidebar:
        st.title(config_loader.get_app_title(config))
        st.markdown("---")
        selected = _render_menu(config_loader.get_menu_items(config))
        st.markdown("---")
        _render_document_status(config_loader.get_experiment_path(config))
        st.caption(f"hswarm-sim v{get_app_version()}")
    return selected


def _render_menu(menu_items: List[Dict[str, str]]) -> Optional[str]:
    pages = [item["page"] for item in menu_items]
    if st.session_state.get("selected_page") not in pages:
        st.session_state.selected_page = pages[0] if pages else None

    for item in menu_items:
        label = f"{item['icon']} {item['label']}" if item.get("icon") else item["label"]
        current = st.session_state.selected_page == item["page"]
        if st.button(label, key=f"nav_{item['id']}", use_container_width=True,
                     type="primary" if current else "secondary"):
            st.session_state.selected_page = item["page"]
            st.rerun()

    return st.session_state.selected_page


def _render_document_status(path: str):
    try:
        experiment = config_loader.load_experiment(path)
    except ConfigError as e:
        st.caption(f"⚠️ `{path}`: {len(e.problems) or 1} problem(s)")
        return
    strategies = "sweep" if experiment.sweep else experiment.base.strategy.value
    st.caption(f"📄 `{path}`: {len(experiment.seeds)} seeds, {strategies}")


def load_and_render_page(module_path: str):
    """
    Import a page module and call its render().

    Import failures, a missing render() and exceptions raised while rendering
    all end on the error page instead of taking the workbench down.
    """
    from src.ui.components import error_page

    try:
        module = importlib.import_module(module_path)
    except ImportError as e:
        logger.error(f"Failed to import page {module_path}: {e}")
        error_page.render(error=e, context=f"Page: {module_path}")
        return

    render = getattr(module, "render", None)
    if not callable(render):
        logger.warning(f"Page {module_path} has no render()")
        error_page.render(context=f"Page {module_path} has no render() function")
        return

    try:
        render()
    except Exception as e:
        logger.exception(f"Error rendering page {module_path}")
        error_page.render(error=e, context=f"Page: {module_path}")
