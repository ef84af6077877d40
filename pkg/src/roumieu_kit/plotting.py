"""PNG figures rendered next to the CSV plot data (headless Agg backend)."""
from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# no version string or timestamp in the file, so reruns are byte-identical
_META = {"Software": None}


def _render(fig) -> bytes:
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=100, metadata=_META)
    plt.close(fig)
    return buf.getvalue()


def line_figure(series: dict[str, tuple], xlabel: str, ylabel: str, title: str,
                logx: bool = False) -> bytes:
    """One axes, one line per ``name -> (x, y)`` entry."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, (x, y) in series.items():
        ax.plot(x, y, label=name, linewidth=1.2)
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if len(series) > 1:
        ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    return _render(fig)


def associated_figure(t, values, title="associated function") -> bytes:
    return line_figure({"omega_N": (t, values)}, "t", "omega_N(t)", title, logx=True)


def conjugate_figure(y, values, title="Young conjugate") -> bytes:
    return line_figure({"phi*": (y, values)}, "y", "phi*(y)", title)


def partial_sups_figure(traces: dict[str, tuple], title="partial sups of log(a_p/N_p)") -> bytes:
    return line_figure(traces, "p", "log max_(q<=p) a_q/N_q", title)
