import argparse
import sys
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd
import pydantic
import yaml

from .common.config import get_config_manager, get_settings, init_config
from .common.errors import EffectKitError, InconclusiveOracleError, ValidationError
from .common.io import write_csv_atomic, write_text_atomic
from .common.logging import get_logger, setup_logging
from .controller.scenario_manager import ScenarioManager
from .models.reports import Report, ScenarioConfig
from .scenarios import register_all

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INVALID = 2
EXIT_INCONCLUSIVE = 3

REPORT_FILE = "report.json"
SERIES_FILE = "series.csv"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="effectkit",
        description="Run effect-algebra scenarios and write report.json / series.csv",
    )
    parser.add_argument("--scenario", help="Scenario name (see --list)")
    parser.add_argument("--config", help="Flat key-value YAML file with scenario, seed and parameters")
    parser.add_argument("--seed", type=int, help="Random seed (required here or in the config file)")
    parser.add_argument("--out", help="Output directory (default: EFFECTKIT_OUTPUT_DIR)")
    parser.add_argument(
        "--tol-override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Tolerance or oracle override, e.g. eig_zero=1e-10; repeatable",
    )
    parser.add_argument("--list", action="store_true", help="List scenarios and exit")
    parser.add_argument("--log-level", help="Logging level (default: EFFECTKIT_LOG_LEVEL)")
    return parser


def parse_overrides(items: List[str]) -> Dict[str, float]:
    """Parse repeated key=value tolerance overrides."""
    overrides: Dict[str, float] = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ValidationError(f"Expected key=value, got {item!r}")
        try:
            overrides[key.strip()] = float(value)
        except ValueError:
            raise ValidationError(f"Override {key.strip()} is not a number: {value!r}")
    return overrides


def write_outputs(report: Report, out_dir: Path) -> List[Path]:
    """Write the report and, when present, its series; both atomically."""
    written = [write_text_atomic(out_dir / REPORT_FILE, report.model_dump_json(indent=2))]
    if report.series:
        written.append(write_csv_atomic(out_dir / SERIES_FILE, pd.DataFrame(report.series)))
    return written


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    init_config()
    settings = get_settings()
    try:
        setup_logging(level=args.log_level or settings.LOG_LEVEL, log_file=settings.LOG_FILE)
    except ValueError as e:
        print(f"effectkit: {e}", file=sys.stderr)
        return EXIT_INVALID

    manager = ScenarioManager(settings, get_config_manager())
    register_all(manager)
    manager.load_from_yaml()

    if args.list:
        print(manager.listing())
        return EXIT_OK

    try:
        data = get_config_manager().load_yaml(args.config) if args.config else {}
        config = ScenarioConfig.from_flat(
            data,
            scenario=args.scenario,
            seed=args.seed,
            output_dir=args.out,
            tolerance_overrides=parse_overrides(args.tol_override),
        )
        report = manager.run(config)
        out_dir = Path(config.output_dir or settings.OUTPUT_DIR)
        for path in write_outputs(report, out_dir):
            logger.info(f"Wrote {path}")
    except InconclusiveOracleError as e:
        logger.error(f"Inconclusive: {e.detail} {e.stats}")
        return e.exit_code
    except EffectKitError as e:
        logger.error(f"{type(e).__name__}: {e.detail}")
        return e.exit_code
    except (pydantic.ValidationError, FileNotFoundError, yaml.YAMLError) as e:
        logger.error(f"Invalid input: {e!s}")
        return EXIT_INVALID
    except Exception as e:
        logger.error(f"Internal error: {e!s}", exc_info=True)
        return EXIT_INTERNAL

    return EXIT_INCONCLUSIVE if report.status == "inconclusive" else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
