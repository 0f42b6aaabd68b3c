from mining.engine import MiningConfig, TemplateMiner, merge, mine, second_pass, validate_candidates
from mining.result import MiningResult, MiningStats
