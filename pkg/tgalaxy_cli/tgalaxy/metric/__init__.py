from tgalaxy.metric.fit import ArmPattern, arm_distance_poly
from tgalaxy.metric.oracle import oracle_crosscheck, settled_oracle, wdistance_oracle
from tgalaxy.metric.search import geodesic, wdistance
from tgalaxy.metric.walks import WalkSpec, validate_walk, walk_length
