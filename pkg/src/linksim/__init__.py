"""linksim: dynamic social-network growth under link-recommendation
interventions, with counterfactual effect measurement."""

from .behaviors import BehaviorSpec, apply_acceptance, decide
from .dynamics import (CalibrationError, CommunitySpec, GrowthParams,
                       HazardParams, MediationMode, apply_attrition,
                       calibrate_sigmoid, hazard_probability,
                       initialize_graph, link_probability, meet_friends,
                       meet_strangers, sample_inner_products, spawn_node)
from .engine import (ABSpec, Band, EffectEntry, InitParams,
                     InterventionWindow, RunMode, Scenario, Trajectory,
                     ab_estimate, ab_run, aggregate, baseline_scenario,
                     decompose_effects, delayed_effect, effect_report,
                     longitudinal_estimate, mean_ci, run_many,
                     run_trajectory, total_effect)
from .graph import (ALL_PROVENANCES, ORGANIC, DimensionError, Graph,
                    GraphError, Node, Provenance)
from .metrics import (UNDEFINED, average_clustering, clustering_coefficient,
                      edge_fractions, gini, homophily, snapshot_metrics)
from .recommenders import (RecommenderSpec, adamic_adar_score,
                           latent_probabilities, recommend_adamic_adar,
                           recommend_fof, recommend_latent)

__version__ = "0.1.0"
