"""Perfect-matching counting through Gaussian boson sampling mathematics.

Modules
-------
graph        adjacency matrices, transforms and spectra
hafnian      exact hafnians and perfect-matching counts
symplectic   covariance-matrix algebra and symplectic decompositions
encoder      adjacency matrix -> Gaussian covariance matrix
circuit      optical circuits generating an encoding
probability  closed-form detection probabilities and hafnian inversion
optimizer    choice of the rescaling c and the diagonal shift d
focksim      truncated Fock-space oracle
cli          command-line entry point
"""

from .graph import Graph, complete_graph, from_edge_list, one_edge_removed, spectrum
from .hafnian import HafValue, haf_bruteforce, haf_recursive

__all__ = [
    "Graph",
    "HafValue",
    "complete_graph",
    "from_edge_list",
    "haf_bruteforce",
    "haf_recursive",
    "one_edge_removed",
    "spectrum",
]

__version__ = "0.1.0"
