"""shoal: fish-swarm driven grid job scheduling.

Subpackages: :mod:`shoal.afsa` (the swarm optimizer), :mod:`shoal.dispatcher`
(keyword folders to task coordinates), :mod:`shoal.gridsim` (discrete-event
grid engine), :mod:`shoal.scheduling` (swarm/grid binding and oracles),
:mod:`shoal.session` + :mod:`shoal.server` (live steering) and
:mod:`shoal.cli` (headless entry point).
"""

__version__ = "0.1.0"
