# plotting.py

import numpy as np
import matplotlib.pyplot as plt


def _finish(fig, save_path, show):
    fig.tight_layout()

    # Save if requested
    if save_path is not None:
        fig.savefig(save_path, dpi=300, bbox_inches="tight")

    if show:
        plt.show()
    plt.close(fig)


# ============================================================
# 1) Parameter sensitivity heatmap (e.g. C vs gamma)
# ============================================================

def plot_sensitivity_grid(table,
                          metric="accuracy",
                          title=None,
                          save_path=None,
                          show=False):
    """
    Heatmap of a validation metric over a two-parameter grid.

    table     : DataFrame from experiments.sensitivity_grid
                (index = first parameter, columns = second parameter)
    metric    : label for the colour bar
    save_path : optional filepath to save the figure (PNG, etc.)
    """
    values = table.to_numpy(dtype=float)
    row_name = table.index.name or "param_a"
    col_name = table.columns.name or "param_b"

    fig, ax = plt.subplots(figsize=(8, 6))
    im = ax.imshow(values, origin="lower", aspect="auto", cmap="viridis")
    fig.colorbar(im, ax=ax, label=metric)

    ax.set_xticks(np.arange(len(table.columns)))
    ax.set_xticklabels([f"{v:g}" for v in table.columns], rotation=45)
    ax.set_yticks(np.arange(len(table.index)))
    ax.set_yticklabels([f"{v:g}" for v in table.index])
    ax.set_xlabel(col_name)
    ax.set_ylabel(row_name)
    ax.set_title(title or f"{metric} over {row_name} x {col_name}")

    _finish(fig, save_path, show)
    return fig


# ============================================================
# 2) Activation function comparison
# ============================================================

def plot_activation_comparison(scores,
                               metric="accuracy",
                               save_path=None,
                               show=False):
    """
    Bar chart of validation scores per activation.

    scores : DataFrame with columns ["activation", "metric"]
             (second return value of experiments.select_activation)
    """
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.bar(scores["activation"], scores["metric"], alpha=0.8)

    best = scores["metric"].idxmin() if metric == "rmse" else scores["metric"].idxmax()
    ax.bar(scores.loc[best, "activation"], scores.loc[best, "metric"],
           color="tab:red", label="selected")

    ax.set_xlabel("Activation")
    ax.set_ylabel(metric)
    ax.set_title("Validation score by activation")
    ax.legend()
    ax.grid(alpha=0.2, axis="y")

    _finish(fig, save_path, show)
    return fig


# ============================================================
# 3) Learner comparison (mean ± std per report)
# ============================================================

def plot_report_comparison(reports,
                           save_path=None,
                           show=False):
    """
    Error-bar plot of mean ± std for a list of RunReports,
    grouped by dataset.
    """
    labels = [f"{r.learner}\n{r.dataset}" for r in reports]
    means = np.array([r.mean for r in reports])
    stds = np.array([r.std for r in reports])
    metric = reports[0].metric if reports else "metric"

    fig, ax = plt.subplots(figsize=(max(6, 1.2 * len(reports)), 5))
    x = np.arange(len(reports))
    ax.errorbar(x, means, yerr=stds, fmt="o", capsize=4)
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylabel(metric)
    ax.set_title("Learner comparison")
    ax.grid(alpha=0.2)

    _finish(fig, save_path, show)
    return fig
