"""
Repair-strategy selector: preview cards with the repaired graph of one sentence.
No side-effects at import time.
"""
from __future__ import annotations

import base64
from typing import Callable, Dict, List

import streamlit as st


def render_strategy_selector(
    previews: List[Dict],
    tr: Callable[..., str],
    key: str = "repair_strategy",
    default: str = "greedy",
) -> str:
    """
    ``previews``: dicts with ``id``, ``label_key``, ``png`` (bytes or None)
    and ``n_added``. Returns the selected strategy id.
    """
    ids = [p["id"] for p in previews]
    if st.session_state.get(key) not in ids:
        st.session_state[key] = default if default in ids else ids[0]
    selected_id = st.session_state[key]

    cols = st.columns(len(previews), gap="small")
    for col, p in zip(cols, previews):
        is_selected = p["id"] == selected_id
        state_class = "selected" if is_selected else "dimmed"
        check_html = '<div class="strategy-check">✓</div>' if is_selected else ""
        img_html = ""
        if p.get("png"):
            b64 = base64.b64encode(p["png"]).decode("utf-8")
            img_html = f'<img src="data:image/png;base64,{b64}" />'
        added = tr("strategy_added", n=p["n_added"]) if p.get("n_added") is not None else "—"

        card_html = f"""
        <div class="strategy-card {state_class}">
            {img_html}
            <div class="strategy-footer">
                {check_html}
                <div class="strategy-title">{tr(p["label_key"])}</div>
                <div class="strategy-sub">{added}</div>
            </div>
        </div>
        """
        with col:
            st.markdown(card_html, unsafe_allow_html=True)
            if st.button(tr("select_strategy_btn"), key=f"select_strategy_btn_{p['id']}", use_container_width=True):
                st.session_state[key] = p["id"]
                st.rerun()

    return st.session_state[key]
