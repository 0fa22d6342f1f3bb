"""gamma-SUP: robust self-updating clustering with q-Gaussian weights."""
from .baselines import KMeansConfig, gap_statistic, kmeans, kmeans_plus
from .datagen import ImageSimSpec, MixtureSpec, gen_images, gen_mixture, gen_toy
from .gammasup import ClusterResult, GammaSupConfig, gamma_nonblurring, gamma_sup, gamma_sup_plus
from .metrics import LabelPair, c_impurity, confusion, impurity, purity_number
from .qcore import QGaussian, TuningParams, from_tuning, q_exp, q_gaussian_pdf, to_tuning, weight
from .reduce import MpcaModel, mpca_fit, mpca_project, pca_fit_project
from .tuning import TauScanResult, default_grid, scan_tau

__all__ = [
    "ClusterResult", "GammaSupConfig", "ImageSimSpec", "KMeansConfig", "LabelPair", "MixtureSpec",
    "MpcaModel", "QGaussian", "TauScanResult", "TuningParams", "c_impurity", "confusion",
    "default_grid", "from_tuning", "gamma_nonblurring", "gamma_sup", "gamma_sup_plus",
    "gap_statistic", "gen_images", "gen_mixture", "gen_toy", "impurity", "kmeans", "kmeans_plus",
    "mpca_fit", "mpca_project", "pca_fit_project", "purity_number", "q_exp", "q_gaussian_pdf",
    "scan_tau", "to_tuning", "weight",
]
