import streamlit as st
from pathlib import Path
from io import BytesIO
from typing import List, Optional

import pandas as pd
import altair as alt

from core.conllu import Sentence, parse_document, serialize_document
from core.config import STRATEGIES, get_default_config
from core.enhancer import RuleId, RuleSet, enhance_document, rule_subset_table
from core.errors import EudkitError, InstanceTooLarge
from core.eud_graph import from_sentence, reachability
from core.eval_elas import LabelMode, export_report_xlsx, macro, per_label_scores, score
from core.graph_connect import connect_document, connect_sentence, fragmentation_stats
from core.graph_render import render_graph_png, render_sentence

from core.i18n import init_lang, tr, LANG_OPTIONS, set_language
from ui.styles import inject_app_css
from ui.strategy_selector import render_strategy_selector

st.set_page_config(
    page_title="eudkit",
    layout="wide",
)

CONFIG = get_default_config()


# -------------------------------
# Output filename helpers
# -------------------------------
def make_safe_stem(upload_name: str, fallback: str = "eudkit") -> str:
    """Filesystem-safe stem (keeps CJK and spaces, removes problematic symbols)."""
    stem = Path(upload_name).stem if upload_name else fallback
    for ch in ['\\', '/', ':', '*', '?', '"', '<', '>', '|', '#']:
        stem = stem.replace(ch, '_')
    stem = stem.strip()
    while '__' in stem:
        stem = stem.replace('__', '_')
    return stem if stem else fallback


def build_output_filename(upload_name: str, tag: str, suffix: str = ".conllu") -> str:
    return f"{make_safe_stem(upload_name)}_{tag}{suffix}"


# -------------------------------
# Upload helpers
# -------------------------------
def load_upload(uploaded) -> Optional[List[Sentence]]:
    """Parse an uploaded CoNLL-U file; shows the error and returns None on bad input."""
    if uploaded is None:
        return None
    try:
        return parse_document(uploaded.getvalue())
    except EudkitError as e:
        st.error(tr("err_input", msg=f"{uploaded.name}: {e}"))
        return None


def first_fragmented(sentences: List[Sentence]) -> Optional[int]:
    for i, s in enumerate(sentences):
        if not reachability(from_sentence(s)).is_connected:
            return i
    return None


# -------------------------------
# UI bootstrap: CSS + language + header
# -------------------------------
init_lang(default="zh")
inject_app_css()

st.markdown("<div class='app-header-row'>", unsafe_allow_html=True)
top_left, top_right = st.columns([8, 1])

with top_left:
    st.markdown(
        f"""
        <div class="app-top-bar">
            <div>
                <div class="app-title-text">{tr('top_brand')}</div>
                <div class="app-title-sub">{tr('top_sub')}</div>
            </div>
        </div>
        """,
        unsafe_allow_html=True,
    )

with top_right:
    st.markdown("<div style='height: 8px;'></div>", unsafe_allow_html=True)
    st.selectbox(
        tr("language_label"),
        options=list(LANG_OPTIONS.values()),
        key="_lang_select_top",
        index=list(LANG_OPTIONS.keys()).index(st.session_state["lang"]),
        on_change=set_language,
    )

st.markdown("</div>", unsafe_allow_html=True)


# ================================
# Main content (card + tabs)
# ================================
with st.container():
    st.markdown('<div class="app-card">', unsafe_allow_html=True)

    tab_eval, tab_repair, tab_enhance, tab_macro = st.tabs([
        tr("tab_evaluate_title"),
        tr("tab_repair_title"),
        tr("tab_enhance_title"),
        tr("tab_macro_title"),
    ])

    # ============================
    # Tab 1: evaluation
    # ============================
    with tab_eval:
        col1, col2 = st.columns(2)
        with col1:
            gold_file = st.file_uploader(tr("eval_gold_label"), type=["conllu"], key="eval_gold_file")
        with col2:
            system_file = st.file_uploader(tr("eval_system_label"), type=["conllu"], key="eval_system_file")

        mode_labels = {LabelMode.FULL: tr("eval_mode_full"), LabelMode.COARSE: tr("eval_mode_coarse")}
        mode = st.radio(
            tr("eval_mode_label"),
            options=list(mode_labels.keys()),
            format_func=mode_labels.get,
            horizontal=True,
            key="eval_mode",
        )

        gold = load_upload(gold_file)
        system = load_upload(system_file)
        if gold is None or system is None:
            st.caption(tr("eval_upload_hint"))
        else:
            try:
                report = score(gold, system, mode)
                df_labels = per_label_scores(gold, system, mode)
            except EudkitError as e:
                st.error(tr("err_input", msg=str(e)))
                report = None

            if report is not None:
                st.subheader(tr("eval_scores_subheader"))
                m1, m2, m3 = st.columns(3)
                m1.metric(tr("metric_precision"), f"{report.precision:.2f}")
                m2.metric(tr("metric_recall"), f"{report.recall:.2f}")
                m3.metric(tr("metric_f1"), f"{report.f1:.2f}")
                st.caption(tr("eval_counts_caption", tp=report.tp, fp=report.fp, fn=report.fn, n=len(gold)))

                st.subheader(tr("eval_labels_subheader"))
                st.dataframe(df_labels, use_container_width=True, hide_index=True)

                if not df_labels.empty:
                    top = df_labels.head(20)
                    chart = (
                        alt.Chart(top)
                        .mark_bar()
                        .encode(
                            x=alt.X("f1:Q", title=tr("axis_f1"), scale=alt.Scale(domain=[0, 100])),
                            y=alt.Y("label:N", title=tr("axis_label"), sort="-x"),
                            tooltip=[
                                alt.Tooltip("label:N", title=tr("axis_label")),
                                alt.Tooltip("support:Q", title=tr("axis_support")),
                                alt.Tooltip("f1:Q", title=tr("axis_f1"), format=".2f"),
                            ],
                        )
                        .properties(title=tr("eval_labels_chart_title"), height=max(200, 22 * len(top)))
                    )
                    st.altair_chart(chart, use_container_width=True)

    # ============================
    # Tab 2: repair fragmented graphs
    # ============================
    with tab_repair:
        repair_file = st.file_uploader(tr("repair_upload_label"), type=["conllu"], key="repair_file")
        sentences = load_upload(repair_file)

        if sentences is not None:
            stats = fragmentation_stats(sentences)
            st.subheader(tr("repair_stats_subheader"))
            s1, s2, s3 = st.columns(3)
            s1.metric(tr("repair_sentences"), stats.n_sentences)
            s2.metric(tr("repair_connected_share"), f"{stats.connected_share:.1f}%")
            s3.metric(tr("repair_unreachable"), stats.n_unreachable)

            max_nodes = int(st.number_input(
                tr("repair_max_nodes_label"),
                min_value=1, max_value=24,
                value=CONFIG.oracle_max_nodes,
                key="repair_max_nodes",
            ))

            idx = first_fragmented(sentences)
            if idx is None:
                st.info(tr("repair_no_fragment"))
            else:
                st.subheader(tr("repair_strategy_subheader"))
                st.caption(tr("repair_preview_caption", index=idx + 1))
                previews = []
                for strategy in STRATEGIES:
                    try:
                        fixed, outcome = connect_sentence(sentences[idx], strategy, max_nodes)
                        png = render_graph_png(
                            outcome.repaired,
                            [t.form for t in fixed.words()] + [t.form for t in fixed.empty_nodes()],
                            highlight=outcome.added_edges,
                        )
                        n_added = outcome.n_added
                    except InstanceTooLarge:
                        png, n_added = None, None
                    previews.append({
                        "id": strategy,
                        "label_key": f"strategy_{strategy}",
                        "png": png,
                        "n_added": n_added,
                    })
                chosen = render_strategy_selector(previews, tr, default=CONFIG.strategy)

                try:
                    repaired, outcomes = connect_document(sentences, chosen, max_nodes)
                except InstanceTooLarge as e:
                    st.error(tr("repair_too_large", msg=str(e)))
                    repaired = None

                if repaired is not None:
                    st.caption(tr(
                        "repair_result_caption",
                        n_fixed=sum(1 for o in outcomes if o.added_edges),
                        n_edges=sum(o.n_added for o in outcomes),
                    ))
                    st.download_button(
                        tr("download_conllu"),
                        data=serialize_document(repaired).encode("utf-8"),
                        file_name=build_output_filename(repair_file.name, chosen),
                        mime="text/plain",
                        key="repair_download",
                    )

    # ============================
    # Tab 3: heuristic enhancement
    # ============================
    with tab_enhance:
        col1, col2 = st.columns(2)
        with col1:
            basic_file = st.file_uploader(tr("enhance_upload_label"), type=["conllu"], key="enhance_basic_file")
        with col2:
            enh_gold_file = st.file_uploader(tr("enhance_gold_label"), type=["conllu"], key="enhance_gold_file")

        basic = load_upload(basic_file)
        enh_gold = load_upload(enh_gold_file)

        use_auto = st.checkbox(tr("enhance_auto_label"), value=False, disabled=enh_gold is None, key="enhance_auto")
        rules: Optional[RuleSet] = None

        if basic is not None and use_auto and enh_gold is not None:
            try:
                table = rule_subset_table(enh_gold, basic)
            except EudkitError as e:
                st.error(tr("err_input", msg=str(e)))
                table = None
            if table is not None:
                st.subheader(tr("enhance_rules_table"))
                st.dataframe(table, use_container_width=True, hide_index=True)
                best = table[table["best"]].iloc[0]
                st.caption(tr("enhance_best_caption", rules=best["rules"], f1=float(best["f1"])))
                rules = RuleSet.parse(best["rules"])
        else:
            picked = st.multiselect(
                tr("enhance_rules_label"),
                options=[r.value for r in RuleId],
                default=[RuleId.CASE_LEMMA.value, RuleId.CONJ_LEMMA.value, RuleId.REL_CLAUSE_REF.value],
                format_func=lambda v: tr(f"rule_{v}"),
                key="enhance_rules",
            )
            try:
                rules = RuleSet(frozenset(RuleId(v) for v in picked))
            except ValueError:
                st.warning(tr("enhance_case_conflict"))

        if basic is not None and rules is not None:
            try:
                enhanced = enhance_document(basic, rules)
            except EudkitError as e:
                st.error(tr("err_input", msg=str(e)))
                enhanced = None
            if enhanced:
                st.subheader(tr("enhance_preview_subheader"))
                st.image(render_sentence(enhanced[0]))
                st.download_button(
                    tr("download_conllu"),
                    data=serialize_document(enhanced).encode("utf-8"),
                    file_name=build_output_filename(basic_file.name, "enhanced"),
                    mime="text/plain",
                    key="enhance_download",
                )

    # ============================
    # Tab 4: macro averages
    # ============================
    with tab_macro:
        csv_file = st.file_uploader(tr("macro_upload_label"), type=["csv"], key="macro_csv")
        if csv_file is not None:
            df_in = pd.read_csv(csv_file)
            if not {"treebank", "language", "f1"} <= set(df_in.columns):
                st.error(tr("macro_columns_error"))
            elif df_in.empty:
                st.error(tr("macro_columns_error"))
            else:
                report = macro(
                    (str(r.treebank), str(r.language), float(r.f1))
                    for r in df_in.itertuples(index=False)
                )
                a1, a2 = st.columns(2)
                a1.metric(tr("macro_treebank_avg"), f"{report.treebank_average:.2f}")
                a2.metric(tr("macro_language_avg"), f"{report.language_average:.2f}")

                df_tb = report.to_frame()
                chart = (
                    alt.Chart(df_tb)
                    .mark_bar()
                    .encode(
                        x=alt.X("treebank:N", title=tr("axis_treebank"), sort=None),
                        y=alt.Y("f1:Q", title=tr("axis_f1")),
                        color=alt.Color("language:N", legend=None),
                        tooltip=["treebank:N", "language:N", alt.Tooltip("f1:Q", format=".2f")],
                    )
                    .properties(title=tr("macro_chart_title"), height=320)
                )
                st.altair_chart(chart, use_container_width=True)
                st.dataframe(df_tb[["treebank", "language", "f1"]], use_container_width=True, hide_index=True)

                buf = BytesIO()
                export_report_xlsx(report, buf)
                st.download_button(
                    tr("download_xlsx"),
                    data=buf.getvalue(),
                    file_name=f"{make_safe_stem(csv_file.name, 'macro')}_macro.xlsx",
                    mime="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet",
                    key="macro_download",
                )

    st.markdown("</div>", unsafe_allow_html=True)
