"""Body-scale meandered textile coil simulator.

Coil geometry synthesis, quasi-static field evaluation, coupled-resonator
link efficiency, exposure-limited power budgeting, and frequency-swept
passive inductive telemetry.
"""

__version__ = "0.1.0"
