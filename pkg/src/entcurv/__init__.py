"""Local entropic curvature bounds for graph spaces."""

from .graph_core import GraphSpace, MoveSet, ball_profile, build_graph_space, graph_from_json, with_measure
from .local_curvature import curvature_report, k_local, r1_local, r_local, rbar_local, rtilde2_local
from .model_zoo import hypercube, lattice_av, lattice_box, parse_model, product_space, rho_tilde, rho_v
from .bridge_transport import dirac_bridge, mixture_bridge, selected_coupling, w1_coupling, w1_distance

__version__ = "0.1.0"

__all__ = ["GraphSpace", "MoveSet", "ball_profile", "build_graph_space", "graph_from_json", "with_measure",
           "curvature_report", "k_local", "r_local", "r1_local", "rbar_local", "rtilde2_local", "hypercube",
           "lattice_box", "lattice_av", "parse_model", "product_space", "rho_v", "rho_tilde", "dirac_bridge",
           "mixture_bridge", "selected_coupling", "w1_coupling", "w1_distance"]
