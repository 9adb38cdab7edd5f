"""Figure rendering for the CLI report paths.

Each helper writes one matplotlib figure to a file. matplotlib is imported
lazily with the Agg backend so text-only runs never pay the import cost and
the tool works without a display.
"""

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_stats_figure(stats, path):
    """Box plot of per-trait relative-error distributions, drawn from the
    already-computed BoxStats so the figure matches the CSV exactly.
    stats: mapping trait name -> BoxStats."""
    plt = _plt()
    boxes = [
        {
            "label": trait,
            "med": s.median,
            "q1": s.q1,
            "q3": s.q3,
            "whislo": s.min,
            "whishi": s.max,
            "fliers": [],
        }
        for trait, s in stats.items()
    ]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bxp(boxes, showfliers=False)
    for i, s in enumerate(stats.values(), start=1):
        ax.annotate(f"{s.median:.2f}", (i, s.median), textcoords="offset points",
                    xytext=(6, 2), fontsize=8)
    ax.axhline(0.0, color="gray", linewidth=0.5)
    ax.set_ylabel("relative error (%)")
    ax.set_title("Per-trait relative error")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_pr_figure(result, path):
    """Precision-recall curve for a DetectionEval result."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 4))
    if result.curve:
        rec = [r for r, _ in result.curve]
        pre = [p for _, p in result.curve]
        ax.plot([0.0] + rec, [pre[0] if pre else 1.0] + pre, drawstyle="steps-post")
    ax.set_xlim(0, 1.05)
    ax.set_ylim(0, 1.05)
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_title(f"AP50 = {result.map50:.3f}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_mee_figure(ids, values, mee, path):
    """Per-pair edge-error bars with the mean marked."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 4))
    pos = np.arange(len(ids))
    ax.bar(pos, values)
    ax.axhline(mee, color="red", linewidth=1, label=f"mean {mee:.3f}%")
    ax.set_xticks(pos, [str(i) for i in ids])
    ax.set_xlabel("fruit id")
    ax.set_ylabel("edge error (%)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_scene_figure(image, fruits, records, path):
    """Scene overlay: polygons and boxes on the input image, annotated with
    the measured metric width x height. records is the per-fruit report
    list; fruits the manifest entries, matched by id."""
    plt = _plt()
    by_id = {r["id"]: r for r in records}
    fig, ax = plt.subplots(figsize=(7, 7 * image.height / max(image.width, 1)))
    if image.channels == 1:
        ax.imshow(image.data, cmap="gray", vmin=0, vmax=255)
    else:
        ax.imshow(image.data)
    for fruit in fruits:
        v = fruit.pred_polygon.vertices
        ring = np.vstack([v, v[:1]])
        ax.plot(ring[:, 0], ring[:, 1], linewidth=1.2)
        x, y, w, h = fruit.box
        ax.add_patch(plt.Rectangle((x, y), w, h, fill=False, linewidth=0.6, linestyle=":"))
        rec = by_id.get(fruit.fruit_id)
        if rec and rec.get("status") == "ok":
            m = rec["metric"]
            label = f"{fruit.fruit_id}: {m['width_cm']:.2f}x{m['height_cm']:.2f} cm"
        else:
            label = f"{fruit.fruit_id}: {rec['error'] if rec else 'missing'}"
        ax.annotate(label, (x, y), color="yellow", fontsize=7,
                    textcoords="offset points", xytext=(0, -3))
    ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
