"""Workbench for CSS code construction, transversal-gate verification, and
fault-tolerance overhead analysis.

Subpackages
-----------
``ftqec.gf2``
    Bit-packed GF(2) linear algebra and enumeration.
``ftqec.classical``
    Classical code constructors (BCH, punctured Reed-Muller, extended
    quadratic-residue) and eligibility certification.
``ftqec.css``
    CSS quantum codes derived from dual-containing classical codes,
    encoded Pauli operators, and the row-deletion derivation.
``ftqec.sim``
    Exact sparse simulation of whole-block (transversal) gates and
    branch-complete measurement.
``ftqec.gadgets``
    Fault-tolerant gadget networks (teleportation, in-block CNOT,
    Toffoli, switching) with branch-complete verification.
``ftqec.overhead``
    Analytic failure-probability/overhead model and table generation.
``ftqec.cli``
    Command-line interface (``ftqec``).
"""

__version__ = "0.1.0"
