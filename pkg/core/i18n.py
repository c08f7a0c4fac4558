"""
Language / translation utilities for the Streamlit app.

UI-agnostic: no page layout here, only language state and translation lookup.
"""
import streamlit as st

LANG_OPTIONS = {
    "zh": "中文",
    "en": "English",
}


def init_lang(default: str = "zh") -> None:
    if "lang" not in st.session_state:
        st.session_state["lang"] = default


TRANSLATIONS = {
    "zh": {
        "top_brand": "eudkit",
        "top_sub": "增強依存圖工具箱",
        "language_label": "🌐 語言",

        "tab_evaluate_title": "評分",
        "tab_repair_title": "圖修復",
        "tab_enhance_title": "規則增強",
        "tab_macro_title": "宏平均",

        "err_input": "輸入錯誤：{msg}",

        # Evaluate
        "eval_gold_label": "Gold 檔 (.conllu)",
        "eval_system_label": "系統輸出 (.conllu)",
        "eval_mode_label": "標籤模式",
        "eval_mode_full": "完整標籤 (ELAS)",
        "eval_mode_coarse": "粗標籤 (EULAS)",
        "eval_scores_subheader": "分數",
        "metric_precision": "精確率",
        "metric_recall": "召回率",
        "metric_f1": "F1",
        "eval_counts_caption": "tp {tp}、fp {fp}、fn {fn}，共 {n} 句",
        "eval_labels_subheader": "各標籤分數",
        "eval_labels_chart_title": "支持度最高的標籤 F1",
        "axis_label": "標籤",
        "axis_f1": "F1",
        "axis_support": "支持度",
        "eval_upload_hint": "請上傳 gold 與系統輸出檔案。",

        # Repair
        "repair_upload_label": "增強圖檔 (.conllu)",
        "repair_stats_subheader": "碎裂統計",
        "repair_sentences": "句數",
        "repair_connected_share": "完全連通比例",
        "repair_unreachable": "不可達節點",
        "repair_max_nodes_label": "窮舉法節點上限",
        "repair_strategy_subheader": "修復策略",
        "repair_preview_caption": "預覽：第 {index} 句（紅色為新增的 root 邊）",
        "repair_no_fragment": "所有句子都已連通，無需修復。",
        "strategy_naive": "全部接上 ROOT",
        "strategy_greedy": "貪婪法",
        "strategy_oracle": "窮舉最少邊",
        "strategy_added": "新增 {n} 條邊",
        "select_strategy_btn": "選擇",
        "repair_too_large": "窮舉法無法處理：{msg}",
        "repair_result_caption": "共修復 {n_fixed} 句，新增 {n_edges} 條 root 邊",
        "download_conllu": "下載 CoNLL-U",

        # Enhance
        "enhance_upload_label": "基本樹檔 (.conllu)",
        "enhance_gold_label": "Gold 增強檔（選用，供自動選規則）",
        "enhance_auto_label": "以 gold 自動選擇最佳規則組合",
        "enhance_rules_label": "啟用規則",
        "enhance_rules_table": "所有規則組合的 ELAS",
        "enhance_best_caption": "最佳組合：{rules}（F1 {f1:.2f}）",
        "enhance_preview_subheader": "第一句預覽",
        "enhance_case_conflict": "兩種格規則不能同時啟用。",
        "rule_case-lemma": "格標記詞元",
        "rule_case-feat": "Case 特徵值",
        "rule_conj-lemma": "連接詞詞元",
        "rule_relcl-ref": "關係子句 ref",

        # Macro
        "macro_upload_label": "分數表 (.csv，欄位 treebank, language, f1)",
        "macro_columns_error": "CSV 需要欄位：treebank, language, f1",
        "macro_treebank_avg": "樹庫平均",
        "macro_language_avg": "語言平均",
        "macro_chart_title": "各樹庫 F1",
        "axis_treebank": "樹庫",
        "download_xlsx": "下載 Excel 報表",
    },
    "en": {
        "top_brand": "eudkit",
        "top_sub": "Enhanced UD toolkit",
        "language_label": "🌐 Language",

        "tab_evaluate_title": "Evaluate",
        "tab_repair_title": "Repair",
        "tab_enhance_title": "Enhance",
        "tab_macro_title": "Macro",

        "err_input": "Input error: {msg}",

        # Evaluate
        "eval_gold_label": "Gold file (.conllu)",
        "eval_system_label": "System output (.conllu)",
        "eval_mode_label": "Label mode",
        "eval_mode_full": "Full labels (ELAS)",
        "eval_mode_coarse": "Coarse labels (EULAS)",
        "eval_scores_subheader": "Scores",
        "metric_precision": "Precision",
        "metric_recall": "Recall",
        "metric_f1": "F1",
        "eval_counts_caption": "tp {tp}, fp {fp}, fn {fn} over {n} sentences",
        "eval_labels_subheader": "Per-label scores",
        "eval_labels_chart_title": "F1 of the most frequent labels",
        "axis_label": "Label",
        "axis_f1": "F1",
        "axis_support": "Support",
        "eval_upload_hint": "Upload a gold file and a system file.",

        # Repair
        "repair_upload_label": "Enhanced graphs (.conllu)",
        "repair_stats_subheader": "Fragmentation",
        "repair_sentences": "Sentences",
        "repair_connected_share": "Fully connected",
        "repair_unreachable": "Unreachable nodes",
        "repair_max_nodes_label": "Oracle node limit",
        "repair_strategy_subheader": "Repair strategy",
        "repair_preview_caption": "Preview: sentence {index} (added root edges in red)",
        "repair_no_fragment": "Every sentence is already connected.",
        "strategy_naive": "Attach all to ROOT",
        "strategy_greedy": "Greedy",
        "strategy_oracle": "Fewest edges (exhaustive)",
        "strategy_added": "{n} edges added",
        "select_strategy_btn": "select",
        "repair_too_large": "Oracle cannot run: {msg}",
        "repair_result_caption": "{n_fixed} sentences repaired, {n_edges} root edges added",
        "download_conllu": "Download CoNLL-U",

        # Enhance
        "enhance_upload_label": "Basic trees (.conllu)",
        "enhance_gold_label": "Gold enhanced file (optional, for automatic rule choice)",
        "enhance_auto_label": "Pick the best rule subset against gold",
        "enhance_rules_label": "Enabled rules",
        "enhance_rules_table": "ELAS of every rule subset",
        "enhance_best_caption": "Best subset: {rules} (F1 {f1:.2f})",
        "enhance_preview_subheader": "First sentence",
        "enhance_case_conflict": "The two case rules cannot be combined.",
        "rule_case-lemma": "Case-marker lemma",
        "rule_case-feat": "Case feature value",
        "rule_conj-lemma": "Conjunction lemma",
        "rule_relcl-ref": "Relative-clause ref",

        # Macro
        "macro_upload_label": "Score table (.csv with columns treebank, language, f1)",
        "macro_columns_error": "The CSV needs the columns treebank, language, f1",
        "macro_treebank_avg": "Treebank average",
        "macro_language_avg": "Language average",
        "macro_chart_title": "F1 per treebank",
        "axis_treebank": "Treebank",
        "download_xlsx": "Download Excel report",
    },
}


def tr(key: str, **kwargs) -> str:
    """Translated string for the current language, formatted with ``kwargs``."""
    lang = st.session_state.get("lang", "zh")
    text = TRANSLATIONS.get(lang, TRANSLATIONS["zh"]).get(key, key)
    if kwargs:
        try:
            text = text.format(**kwargs)
        except (KeyError, IndexError, ValueError):
            pass
    return text


def set_language():
    """on_change callback of the language selectbox."""
    label_to_code = {v: k for k, v in LANG_OPTIONS.items()}
    selected_label = st.session_state.get("_lang_select_top", LANG_OPTIONS["zh"])
    st.session_state["lang"] = label_to_code.get(selected_label, "zh")
