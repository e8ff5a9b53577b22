"""
Servicio de gráficas
SVG deterministas a partir de los CSV de experimentos
"""
import logging
import os
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from mtkit.exceptions import InvalidArgumentError  # noqa: E402
from mtkit.models.experiment import PlotSpec  # noqa: E402
from mtkit.services.io import read_csv  # noqa: E402

logger = logging.getLogger(__name__)

# sal fija para los ids del SVG
SVG_HASHSALT = "mtkit"


def emit_plot(csv_path: str, spec: PlotSpec, svg_path: Optional[str] = None) -> str:
    """Dibuja las columnas spec.y contra spec.x y guarda un SVG sin fecha"""
    frame = read_csv(csv_path, [spec.x, *spec.y])
    if frame.empty:
        raise InvalidArgumentError(f"CSV {csv_path} has no rows to plot")

    svg_path = os.path.splitext(csv_path)[0] + ".svg" if svg_path is None else svg_path
    parent = os.path.dirname(svg_path)
    if parent:
        os.makedirs(parent, exist_ok=True)

    with plt.rc_context({"svg.hashsalt": SVG_HASHSALT, "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        try:
            for column in spec.y:
                if spec.kind == "scatter":
                    ax.scatter(frame[spec.x], frame[column], s=12, label=column)
                else:
                    ax.plot(frame[spec.x], frame[column], marker="o", label=column)
            if spec.logy:
                ax.set_yscale("log")
            ax.set_xlabel(spec.x)
            ax.set_title(spec.title)
            ax.legend()
            ax.grid(True, alpha=0.3)
            fig.tight_layout()
            fig.savefig(svg_path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)

    logger.info(f"✓ Gráfica escrita: {svg_path}")
    return svg_path
