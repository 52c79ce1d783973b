"""Simulated robot-tracking demonstrator."""
from .config import LEFT_BLIND_SPOT, SOURCES, ScenarioConfig, dump_config, load_config
from .demo import CSV_COLUMNS, DemoRun, build_demo_model, run_demo, write_ground_truth
from .evaluate import InsufficientSpanError, evaluate, max_gap_us, read_csv
from .trajectory import Command, GroundTruth, generate_input_program

__all__ = [
    "LEFT_BLIND_SPOT", "SOURCES", "ScenarioConfig", "dump_config", "load_config",
    "CSV_COLUMNS", "DemoRun", "build_demo_model", "run_demo", "write_ground_truth",
    "InsufficientSpanError", "evaluate", "max_gap_us", "read_csv",
    "Command", "GroundTruth", "generate_input_program",
]
