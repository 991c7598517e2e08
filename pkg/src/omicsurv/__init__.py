"""omicsurv: cross-platform expression integration and survival classification.

Subpackages follow the pipeline stages: dataio (loading/merging), synth
(synthetic cohorts), normalize (FSQN), survival (labels and Kaplan-Meier),
project (exact t-SNE), models (classifier/regressor suite), rpensemble
(random-projection ensemble), evaluation (ROC/AUC and cross-validation),
search and pipeline (hyperparameter search and orchestration).
"""

__version__ = "0.1.0"
