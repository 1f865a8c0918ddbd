"""pondwatch command line: simulate, serve, verdict, evaluate, export-report."""

import argparse
import logging
import sys
import tomllib
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import requests

from app.config import configure_logging, get_settings, settings_from_env
from app.errors import NotFoundError, PondwatchError, ValidationError
from app.ml import registry
from app.ml.cross_validation import evaluate_algorithms
from app.ml.dataset import load_dataset_csv
from app.ml.serialization import save_model
from app.ml.synthetic import disjoint_species_config, generate_labeled_dataset
from app.schemas import (
    ChannelResponse,
    FeedEntrySchema,
    FeedPage,
    Parameter,
    PondProfile,
    PondVerdict,
    SuitabilityConfig,
)
from app.services import fixtures
from app.services.channel_store import POND_FIELD_LABELS, stabilization_filter
from app.services.feed_export import FeedExporter, format_timestamp
from app.services.feed_parser import FIELD_PARAMETERS, FeedParser
from app.services.reporting import OUTPUT_FORMATS, load_reports, render_reports, render_verdicts
from app.services.sensor_sim import simulate_pond_stream
from app.services.suitability import SuitabilityEvaluator, evaluate_fixture_ponds

logger = logging.getLogger("pondwatch")

PARAMETER_FIELDS: Dict[Parameter, int] = {p: i for i, p in FIELD_PARAMETERS.items()}
HTTP_TIMEOUT_S = 30
FEED_RESULTS_MAX = 8000


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        logger.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def _parse_start(text: str) -> datetime:
    try:
        moment = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an ISO-8601 timestamp: {text}") from exc
    return moment if moment.tzinfo else moment.replace(tzinfo=timezone.utc)


# simulate


def simulate_feed(
    profile: PondProfile,
    duration_s: int,
    interval_s: int,
    warmup_s: int,
    seed: int,
    start: datetime,
) -> FeedPage:
    """Stream duration + warmup seconds of readings, then drop the warm-up entries."""
    samples = simulate_pond_stream(profile, duration_s + warmup_s, interval_s, seed)
    ticks: Dict[int, Dict[int, float]] = {}
    for sample in samples:
        if sample.parameter not in PARAMETER_FIELDS:
            continue
        ticks.setdefault(sample.timestamp, {})[PARAMETER_FIELDS[sample.parameter]] = sample.value
    field_indices = list(range(1, len(POND_FIELD_LABELS) + 1))
    entries = [
        FeedEntrySchema(
            entry_id=entry_id,
            created_at=start + timedelta(seconds=offset),
            field_values={index: values.get(index) for index in field_indices},
        )
        for entry_id, (offset, values) in enumerate(sorted(ticks.items()), start=1)
    ]
    entries = stabilization_filter(entries, warmup_s, origin=start)
    channel = ChannelResponse(
        id=profile.pond_id,
        name=f"pond-{profile.pond_id}",
        field_labels=POND_FIELD_LABELS,
        created_at=start,
        last_entry_id=entries[-1].entry_id if entries else None,
    )
    return FeedPage(channel=channel, field_indices=field_indices, entries=entries)


def post_feed(page: FeedPage, url: str, api_key: str) -> int:
    endpoint = url.rstrip("/") + "/update"
    for entry in page.entries:
        payload = {"api_key": api_key, "created_at": format_timestamp(entry.created_at)}
        payload.update(
            {f"field{i}": repr(v) for i, v in entry.field_values.items() if v is not None}
        )
        response = requests.post(endpoint, data=payload, timeout=HTTP_TIMEOUT_S)
        if response.status_code == 401:
            raise ValidationError("service rejected the write key")
        response.raise_for_status()
        if response.text.strip() == "0":
            raise ValidationError(f"service refused entry {entry.entry_id}")
    logger.info("posted %d entries to %s", len(page.entries), endpoint)
    return len(page.entries)


def cmd_simulate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.post and not args.api_key:
        parser.error("--post needs --api-key")
    if args.duration <= 0 or args.interval <= 0 or args.warmup < 0:
        parser.error("--duration and --interval must be positive, --warmup non-negative")
    if args.profile:
        profile = PondProfile.model_validate_json(Path(args.profile).read_text(encoding="utf-8"))
    else:
        profile = fixtures.builtin_profile(args.pond)
    start = args.start or profile.session_start or datetime(2020, 12, 20, tzinfo=timezone.utc)

    page = simulate_feed(profile, args.duration, args.interval, args.warmup, args.seed, start)
    _emit(FeedExporter.to_csv(page), args.out)
    if args.post:
        post_feed(page, args.post, args.api_key)
    return 0


# serve


def cmd_serve(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    import uvicorn

    from app.main import create_app

    settings = settings_from_env(data_dir=args.data_dir, host=args.host, port=args.port)
    app = create_app(settings)
    uvicorn.run(app, host=settings.host, port=settings.port, log_level=args.log_level.lower())
    return 0


# verdict


def _suitability_config(args: argparse.Namespace) -> SuitabilityConfig:
    values = dict(getattr(args, "suitability", None) or {})
    if args.threshold is not None:
        values["threshold"] = args.threshold
    return SuitabilityConfig(**values)


def _channel_feed(url: str) -> Tuple[List[FeedEntrySchema], Dict[int, Parameter]]:
    response = requests.get(url, params={"results": FEED_RESULTS_MAX}, timeout=HTTP_TIMEOUT_S)
    response.raise_for_status()
    entries = FeedParser.read_json(response.text)
    return entries, FeedParser.channel_field_parameters(response.json())


def cmd_verdict(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    config = _suitability_config(args)
    depth_range = tuple(args.depth_range) if args.depth_range else None

    if args.fixtures:
        verdicts: List[PondVerdict] = list(evaluate_fixture_ponds(config).values())
        if args.pond is not None:
            verdicts = [v for v in verdicts if v.pond_id == args.pond]
            if not verdicts:
                raise NotFoundError(f"no fixture data for pond {args.pond}")
    else:
        if args.input:
            entries, mapping = FeedParser.read_csv(args.input), None
        else:
            entries, mapping = _channel_feed(args.channel_url)
        if args.warmup:
            entries = stabilization_filter(entries, args.warmup)
        samples = FeedParser.samples_from_feed(entries, mapping)
        pond_id = args.pond if args.pond is not None else 1
        verdicts = [SuitabilityEvaluator.evaluate_pond(pond_id, samples, depth_range, config)]

    _emit(render_verdicts(verdicts, args.format), args.out)
    return 0


# evaluate


def cmd_evaluate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    try:
        tags = registry.parse_tags(args.algo)
    except NotFoundError as exc:
        parser.error(str(exc))
    if args.folds < 2:
        parser.error("--folds must be at least 2")

    if args.dataset:
        dataset = load_dataset_csv(args.dataset)
    else:
        species = disjoint_species_config() if args.disjoint else None
        dataset = generate_labeled_dataset(args.synthetic, args.seed, species, args.noise)

    reports = evaluate_algorithms(tags, dataset, args.folds, args.seed)
    _emit(render_reports(reports, args.format), args.out)

    if args.save_models:
        target = Path(args.save_models)
        target.mkdir(parents=True, exist_ok=True)
        for tag in tags:
            path = save_model(registry.train(tag, dataset, seed=args.seed), target / f"{tag}.json")
            logger.info("saved %s model to %s", tag, path)
    return 0


# export-report


def cmd_export_report(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.fixtures:
        frame = fixtures.fixtures_frame()
        if args.format == "csv":
            text = fixtures.export_fixtures_csv()
        elif args.format == "json":
            text = frame.to_json(orient="records") + "\n"
        else:
            text = frame.to_string(index=False) + "\n"
    else:
        reports = load_reports(Path(args.input).read_text(encoding="utf-8"))
        text = render_reports(reports, args.format)
    _emit(text, args.out)
    return 0


# parser


def _add_output(sub: argparse.ArgumentParser, default: str = "text") -> None:
    sub.add_argument("--format", choices=OUTPUT_FORMATS, default=default)
    sub.add_argument("--out", help="write to FILE instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pondwatch",
        description="Pond water-quality telemetry, suitability verdicts and species classifiers",
    )
    parser.add_argument("--config", help="TOML file of option defaults")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    commands = parser.add_subparsers(dest="command", required=True, metavar="<command>")

    simulate = commands.add_parser("simulate", help="generate a seeded pond feed as CSV")
    source = simulate.add_mutually_exclusive_group(required=True)
    source.add_argument("--pond", type=int, choices=fixtures.POND_IDS)
    source.add_argument("--profile", help="pond profile JSON file")
    simulate.add_argument("--duration", type=int, default=3000, help="seconds kept after warm-up")
    simulate.add_argument("--interval", type=int, default=150, help="seconds between readings")
    simulate.add_argument("--warmup", type=int, default=180, help="seconds discarded at start")
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--start", type=_parse_start, help="ISO-8601 time of the first reading")
    simulate.add_argument("--out", help="write to FILE instead of stdout")
    simulate.add_argument("--post", metavar="URL", help="also send every entry to a service")
    simulate.add_argument("--api-key", help="channel write key for --post")
    simulate.set_defaults(handler=cmd_simulate)

    serve = commands.add_parser("serve", help="run the telemetry HTTP service")
    serve.add_argument("--host", default=None)
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument("--data-dir", default=None)
    serve.set_defaults(handler=cmd_serve)

    verdict = commands.add_parser("verdict", help="judge pond suitability")
    source = verdict.add_mutually_exclusive_group(required=True)
    source.add_argument("--fixtures", action="store_true", help="the five surveyed ponds")
    source.add_argument("--input", help="feed CSV file")
    source.add_argument("--channel-url", help="JSON feed URL of a running service")
    verdict.add_argument("--pond", type=int)
    verdict.add_argument("--depth-range", type=float, nargs=2, metavar=("LO", "HI"))
    verdict.add_argument("--threshold", type=float, default=None)
    verdict.add_argument("--warmup", type=int, default=None)
    _add_output(verdict)
    verdict.set_defaults(handler=cmd_verdict)

    evaluate = commands.add_parser("evaluate", help="cross-validate species classifiers")
    source = evaluate.add_mutually_exclusive_group(required=True)
    source.add_argument("--dataset", help="labelled CSV file")
    source.add_argument("--synthetic", type=int, metavar="N", help="generate N instances")
    evaluate.add_argument("--seed", type=int, default=1)
    evaluate.add_argument(
        "--algo",
        default="all",
        help=f"'all' or comma-separated tags: {', '.join(registry.valid_tags())}",
    )
    evaluate.add_argument("--folds", type=int, default=10)
    evaluate.add_argument("--noise", type=float, default=0.0, help="sigma as fraction of width")
    evaluate.add_argument("--disjoint", action="store_true", help="non-overlapping envelopes")
    evaluate.add_argument("--save-models", metavar="DIR")
    _add_output(evaluate)
    evaluate.set_defaults(handler=cmd_evaluate)

    export = commands.add_parser("export-report", help="re-render a saved report")
    source = export.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", help="JSON written by evaluate --format json")
    source.add_argument("--fixtures", action="store_true", help="the embedded survey tables")
    _add_output(export)
    export.set_defaults(handler=cmd_export_report)
    return parser


def load_config(path: str) -> Dict[str, Any]:
    try:
        with open(path, "rb") as handle:
            return tomllib.load(handle)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"config file {path} is not valid TOML: {exc}") from exc


def apply_config(parser: argparse.ArgumentParser, config: Dict[str, Any]) -> None:
    """Config values become parser defaults, so explicit flags still win."""
    subparsers = next(
        action for action in parser._actions if isinstance(action, argparse._SubParsersAction)
    )
    shared = {k.replace("-", "_"): v for k, v in config.items() if not isinstance(v, dict)}
    if "log_level" in shared:
        parser.set_defaults(log_level=shared["log_level"])
    for name, sub in subparsers.choices.items():
        table = config.get(name, {})
        values = {**shared, **{k.replace("-", "_"): v for k, v in table.items()}}
        known = {action.dest for action in sub._actions}
        sub.set_defaults(**{k: v for k, v in values.items() if k in known})
    if "suitability" in config:
        subparsers.choices["verdict"].set_defaults(suitability=config["suitability"])


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()

    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    pre.add_argument("--log-level")
    early, _ = pre.parse_known_args(argv)
    try:
        if early.config:
            apply_config(parser, load_config(early.config))
    except (PondwatchError, OSError) as exc:
        sys.stderr.write(f"pondwatch: error: {exc}\n")
        return 1

    args = parser.parse_args(argv)
    args.log_level = (args.log_level or get_settings().log_level).upper()
    configure_logging(args.log_level)

    try:
        return args.handler(args, parser)
    except (PondwatchError, OSError, requests.RequestException, ValueError) as exc:
        logger.debug("command failed", exc_info=True)
        sys.stderr.write(f"pondwatch: error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
