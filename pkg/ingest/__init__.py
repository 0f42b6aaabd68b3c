from ingest.ground_truth import GroundTruth, load_ground_truth, load_templates, parse_template_lines
from ingest.syslog import UNKNOWN_APP, LogMessage, Partition, parse_syslog_line, partition_by_app, read_log
