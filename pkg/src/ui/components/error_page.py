"""
Error panel shown when a workbench page fails to load or raises.
"""
import streamlit as st
import traceback

from src.logic.errors import ConfigError


def render(error: Exception = None, context: str = None):
    """
    Render a friendly error page.

    Args:
        error: The exception that occurred (optional)
        context: Additional context about the error (optional)
    """
    st.error("⚠️ An Error Occurred")
    st.markdown("""
    Something went wrong while rendering this page.

    - Try another page from the sidebar
    - Review the logs in `logs/hswarm.log` for details
    """)

    if context:
        st.info(f"**Context**: {context}")

    if error:
        st.warning(f"**Error**: {error}")
        with st.expander("Technical Details (for debugging)"):
            st.code("".join(traceback.format_exception(error)))


def render_config_error(error: ConfigError):
    """List every problem of a rejected experiment document."""
    where = f" (line {error.line})" if error.line is not None else ""
    st.error(f"The experiment document is invalid{where}:")
    st.markdown("\n".join(f"- {p}" for p in error.problems))
