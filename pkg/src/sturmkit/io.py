"""Deterministic JSON and minimal SVG output."""

import math

import numpy as np


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v) or math.isinf(v):
            return "null"
        return f"{v:.17g}"
    if isinstance(v, str):
        import json

        return json.dumps(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps_json(obj, indent=2, _level=0):
    """JSON text with every float printed to 17 significant digits, so equal
    inputs give byte-identical files."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}{_fmt(str(k))}: {dumps_json(v, indent, _level + 1)}'
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_fmt(v) for v in seq) + "]"
        items = [pad + dumps_json(v, indent, _level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return _fmt(obj)


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps_json(obj) + "\n")


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _polyline(xs, ys, color, width=1.0, dash=None):
    pts = " ".join(f"{x:.6f},{y:.6f}" for x, y in zip(xs, ys))
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<polyline fill="none" stroke="{color}" '
            f'stroke-width="{width}" vector-effect="non-scaling-stroke"'
            f'{extra} points="{pts}"/>')


def svg_plot(series, path, width=640, height=360, title=None):
    """Overlay of ``(x, y, label)`` series, y axis pointing up."""
    xs = np.concatenate([np.asarray(s[0]) for s in series])
    ys = np.concatenate([np.asarray(s[1]) for s in series])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 1, y1 + 1
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" viewBox="{x0:.6f} {-y1:.6f} {x1 - x0:.6f} '
             f'{y1 - y0:.6f}" preserveAspectRatio="none">']
    if title:
        parts.append(f"<title>{title}</title>")
    if y0 < 0 < y1:
        parts.append(_polyline([x0, x1], [0, 0], "#999999", 0.5, "4 2"))
    for i, (x, y, label) in enumerate(series):
        parts.append(f"<!-- {label} -->")
        parts.append(_polyline(x, -np.asarray(y), _COLORS[i % len(_COLORS)]))
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def svg_curve(curves, path, size=480, title=None):
    """Plane curves ``(x, y, label)`` with equal axis scaling."""
    xs = np.concatenate([np.asarray(c[0]) for c in curves])
    ys = np.concatenate([np.asarray(c[1]) for c in curves])
    r = 1.1 * float(max(np.abs(xs).max(), np.abs(ys).max(), 1e-12))
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
             f'height="{size}" viewBox="{-r:.6f} {-r:.6f} {2 * r:.6f} '
             f'{2 * r:.6f}">']
    if title:
        parts.append(f"<title>{title}</title>")
    parts.append(_polyline([-r, r], [0, 0], "#999999", 0.5, "4 2"))
    parts.append(_polyline([0, 0], [-r, r], "#999999", 0.5, "4 2"))
    for i, (x, y, label) in enumerate(curves):
        parts.append(f"<!-- {label} -->")
        parts.append(_polyline(x, -np.asarray(y), _COLORS[i % len(_COLORS)],
                               dash="6 3" if i % 2 else None))
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
