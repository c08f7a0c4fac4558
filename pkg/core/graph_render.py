# core/graph_render.py
"""
Arc-diagram rendering of enhanced graphs (Pillow).

Words sit on a baseline, ROOT on the far left, every edge is a half-ellipse
above the words from head to dependent with its label at the arc top and a
small arrow head at the dependent. Edges passed as ``highlight`` (e.g. the
root edges added by a connector) are drawn in a second colour.
"""
from __future__ import annotations

import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple

from PIL import Image, ImageDraw, ImageFont

from core.conllu import Sentence
from core.eud_graph import Edge, EnhancedGraph, NodeIndexer, from_sentence

logger = logging.getLogger(__name__)


# ============================================================
# Config
# ============================================================

@dataclass
class GraphRenderConfig:
    font_path: Optional[Path] = None
    font_size: int = 14
    label_font_size: int = 11

    word_gap_px: int = 28
    margin_px: int = 20
    level_height_px: int = 22     # vertical step per arc span level
    baseline_pad_px: int = 16

    background: tuple = (255, 255, 255, 255)
    word_color: tuple = (20, 20, 20, 255)
    root_color: tuple = (120, 120, 120, 255)
    arc_color: tuple = (40, 90, 160, 255)
    label_color: tuple = (40, 90, 160, 255)
    highlight_color: tuple = (215, 60, 40, 255)
    arc_width: int = 2
    arrow_px: int = 5


def get_graph_render_config() -> GraphRenderConfig:
    return GraphRenderConfig()


# ============================================================
# Helpers
# ============================================================

def _load_font(path: Optional[Path], size: int):
    if path is not None and Path(path).exists():
        try:
            return ImageFont.truetype(str(path), int(size))
        except OSError:
            logger.warning("[RENDER] cannot load font %s, using default", path)
    return ImageFont.load_default()


def text_size(draw: ImageDraw.ImageDraw, text: str, font) -> Tuple[int, int]:
    x0, y0, x1, y1 = draw.textbbox((0, 0), text, font=font)
    return x1 - x0, y1 - y0


def _span_levels(edges: Sequence[Edge]) -> dict:
    """Arc height level per edge: longer spans sit higher."""
    spans = sorted({abs(e.head - e.dependent) for e in edges})
    return {e: spans.index(abs(e.head - e.dependent)) + 1 for e in edges}


# ============================================================
# Rendering
# ============================================================

def render_graph(
    graph: EnhancedGraph,
    forms: Sequence[str],
    highlight: Iterable[Edge] = (),
    cfg: Optional[GraphRenderConfig] = None,
) -> Image.Image:
    """``forms`` names nodes 1..N-1 in dense index order (words, then empty nodes)."""
    cfg = cfg or get_graph_render_config()
    if len(forms) != graph.n_nodes - 1:
        raise ValueError(f"{len(forms)} forms for a graph with {graph.n_nodes - 1} nodes")

    font = _load_font(cfg.font_path, cfg.font_size)
    label_font = _load_font(cfg.font_path, cfg.label_font_size)
    highlighted = set(highlight)
    edges = graph.sorted_edges() + sorted(highlighted - graph.edges)

    measure = ImageDraw.Draw(Image.new("RGBA", (1, 1)))
    names = ["ROOT"] + [str(f) for f in forms]
    widths = [text_size(measure, name, font)[0] for name in names]
    text_h = max(text_size(measure, name, font)[1] for name in names)

    # x centre of each node
    centers = []
    x = cfg.margin_px
    for w in widths:
        centers.append(x + w // 2)
        x += w + cfg.word_gap_px
    width = x - cfg.word_gap_px + cfg.margin_px

    levels = _span_levels(edges) if edges else {}
    top = cfg.margin_px + cfg.label_font_size
    arcs_h = (max(levels.values()) if levels else 0) * cfg.level_height_px
    baseline = top + arcs_h + cfg.baseline_pad_px
    height = baseline + text_h + cfg.margin_px

    img = Image.new("RGBA", (int(width), int(height)), cfg.background)
    draw = ImageDraw.Draw(img)

    for i, name in enumerate(names):
        color = cfg.root_color if i == 0 else cfg.word_color
        draw.text((centers[i] - widths[i] // 2, baseline), name, font=font, fill=color)

    foot = baseline - 4
    for e in edges:
        color = cfg.highlight_color if e in highlighted else cfg.arc_color
        x0, x1 = sorted((centers[e.head], centers[e.dependent]))
        rise = levels[e] * cfg.level_height_px
        draw.arc([x0, foot - rise, x1, foot + rise], start=180, end=360, fill=color, width=cfg.arc_width)

        xd = centers[e.dependent]
        a = cfg.arrow_px
        draw.polygon([(xd, foot), (xd - a, foot - 2 * a), (xd + a, foot - 2 * a)], fill=color)

        lw, lh = text_size(draw, e.label, label_font)
        lx = (x0 + x1) // 2 - lw // 2
        ly = foot - rise - lh - 2
        draw.rectangle([lx - 1, ly, lx + lw + 1, ly + lh + 2], fill=cfg.background)
        draw.text((lx, ly), e.label, font=label_font,
                  fill=cfg.highlight_color if e in highlighted else cfg.label_color)
    return img


def render_graph_png(
    graph: EnhancedGraph,
    forms: Sequence[str],
    highlight: Iterable[Edge] = (),
    cfg: Optional[GraphRenderConfig] = None,
) -> bytes:
    buf = io.BytesIO()
    render_graph(graph, forms, highlight, cfg).save(buf, format="PNG")
    return buf.getvalue()


def render_sentence(
    sentence: Sentence,
    highlight: Iterable[Edge] = (),
    cfg: Optional[GraphRenderConfig] = None,
) -> Image.Image:
    """Render the DEPS graph of a sentence; empty nodes are shown as ``form (b.s)``."""
    indexer = NodeIndexer(sentence)
    forms = []
    for i in range(1, indexer.n_words + indexer.n_empty + 1):
        tid = indexer.id_of(i)
        tok = next(t for t in sentence.tokens if t.id == tid)
        forms.append(tok.form if tok.is_word else f"{tok.form} ({tid})")
    return render_graph(from_sentence(sentence), forms, highlight, cfg)
