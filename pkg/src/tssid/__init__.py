"""tssid: system identification toolkit for turboshaft torque prediction.

Builds dynamic torque models from flight-log time series along two routes:

* sparse regression of governing ODEs (first and second order) from a
  library of candidate terms, integrated with fixed-step RK4;
* from-scratch feedforward and LSTM neural predictors trained with
  manual backpropagation.

Includes a synthetic flight generator that serves as ground-truth oracle,
a hierarchical relative-MAE evaluation protocol (maneuver, flight,
overall), and a ``tssid`` command line pipeline.
"""

__version__ = "0.1.0"
