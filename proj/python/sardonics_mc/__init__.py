from ._core import (
    Edge,
    IsingModel,
    KernelParams,
    acf,
    acf_area,
    adapt,
    energy,
    exact_distribution,
    load_model,
    make_bipartite_rbm,
    make_chimera,
    make_cube_3d,
    make_torus_2d,
    random_state,
    run_gibbs,
    run_sardonics,
    run_swendsen_wang,
    save_model,
    tv_distance,
)

__all__ = [
    "Edge",
    "IsingModel",
    "KernelParams",
    "acf",
    "acf_area",
    "adapt",
    "energy",
    "exact_distribution",
    "load_model",
    "make_bipartite_rbm",
    "make_chimera",
    "make_cube_3d",
    "make_torus_2d",
    "random_state",
    "run_gibbs",
    "run_sardonics",
    "run_swendsen_wang",
    "save_model",
    "tv_distance",
]
