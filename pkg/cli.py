#!/usr/bin/env python3
"""
WARPP Benchmark CLI
Command-line interface for generating profiles and ground truth, running
sessions in every mode, scoring them and running the Robot Framework suites.
"""
import json
import subprocess
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime
from pathlib import Path

import click
from colorama import Fore, Style, init
from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn
from tabulate import tabulate

from config import get_config
from libraries.datagen import DatagenError, generate_profiles, load_profiles, write_profiles
from libraries.datagen.ground_truth import generate_ground_truth
from libraries.metrics import (
    MetricsError,
    MissingGroundTruth,
    PerturbSpec,
    aggregate,
    build_report,
    check_seeds,
    perturb,
    round_rows,
    write_csv,
    write_json,
)
from libraries.orchestration import (
    Catalog,
    Engine,
    EngineConfig,
    Mode,
    OrchestrationError,
    Trajectory,
    __version__ as ENGINE_VERSION,
    read_meta,
)
from libraries.personalizer import Audit, ClientData, PersonalizerError, audit, trim
from libraries.tools import LatencySpec, ToolError
from libraries.workflow import WorkflowError, token_count

# Initialize colorama for colored terminal output
init(autoreset=True)
console = Console()

# Project paths
PROJECT_ROOT = Path(__file__).parent
TESTS_DIR = PROJECT_ROOT / 'tests'
REPORTS_DIR = PROJECT_ROOT / 'reports'

ENGINE_ERRORS = (OrchestrationError, DatagenError, WorkflowError, ToolError, PersonalizerError, MetricsError)
MODE_CHOICES = [mode.value for mode in Mode]


def print_header(text):
    """Print styled header."""
    print(f"\n{Fore.CYAN}{'=' * 60}")
    print(f"{Fore.CYAN}{text.center(60)}")
    print(f"{Fore.CYAN}{'=' * 60}{Style.RESET_ALL}\n")


def print_success(text):
    """Print success message."""
    print(f"{Fore.GREEN}✓ {text}{Style.RESET_ALL}")


def print_error(text):
    """Print error message."""
    print(f"{Fore.RED}✗ {text}{Style.RESET_ALL}")


def print_info(text):
    """Print info message."""
    print(f"{Fore.YELLOW}ℹ {text}{Style.RESET_ALL}")


def load_settings(env, config_file, seed=None, out=None, virtual_clock=None):
    """YAML environment, then the JSON experiment file, then command-line flags."""
    config = get_config(env)
    if config_file:
        config.load_experiment(config_file)
    if seed is not None:
        config.set('datagen.seed', seed)
    if out is not None:
        config.set('experiment.out_dir', str(out))
    if virtual_clock is not None:
        config.set('tools.clock', 'virtual' if virtual_clock else 'wall')
    return config


def build_engine(config):
    catalog = Catalog.load(
        config.fixture_path(config.get('tools.index', 'fixtures/domains.json')),
        max_depth=config.get('workflow.max_branch_depth', 8),
        terminal_tool=config.get('workflow.terminal_tool', 'complete_case'),
        default_latency=LatencySpec(
            config.get('tools.latency.min_ms', 50), config.get('tools.latency.max_ms', 200)
        ),
        default_failure_rate=config.get('tools.failure_rate', 0.02),
    )
    return Engine(catalog, EngineConfig.from_config(config))


def artifact_meta(config):
    """Provenance stamped on every artifact."""
    return {
        'config_hash': config.digest(),
        'seed': config.get('datagen.seed', 0),
        'engine_version': ENGINE_VERSION,
    }


def out_dir(config):
    path = Path(config.get('experiment.out_dir', 'results'))
    return path if path.is_absolute() else PROJECT_ROOT / path


def write_manifest(config, root, command):
    manifest = {**artifact_meta(config), 'environment': config.environment, 'command': command}
    path = root / 'manifest.json'
    root.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + '\n', encoding='utf-8')
    return path


def selected_modes(config, modes):
    return [Mode.parse(m) for m in (modes or config.get('experiment.modes', MODE_CHOICES))]


def selected_intents(catalog, domains, intents):
    """Catalog entries named by --domains and --intents; unknown names are usage errors."""
    unknown = sorted(set(domains) - set(catalog.domains))
    if unknown:
        raise click.UsageError(f"Unknown domain(s): {', '.join(unknown)}; known: {', '.join(catalog.domains)}")
    entries = [entry for entry in catalog.intents() if not domains or entry.domain in domains]
    names = [entry.name for entry in entries]
    unknown = sorted(set(intents) - set(names))
    if unknown:
        raise click.UsageError(f"Unknown intent(s): {', '.join(unknown)}; known: {', '.join(names)}")
    return [entry for entry in entries if not intents or entry.name in intents]


def run_parallel(label, jobs, workers):
    """Run callables on a thread pool with a rich progress bar; results keep job order."""
    results = []
    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TaskProgressColumn(),
        console=console,
    ) as progress:
        task = progress.add_task(f"[cyan]{label}", total=len(jobs))
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            for result in pool.map(lambda job: job(), jobs):
                results.append(result)
                progress.advance(task)
    return results


def fail(error):
    print_error(str(error))
    sys.exit(1)


def common_options(func):
    func = click.option('--env', type=click.Choice(['dev', 'ci']), default=None,
                        help='Environment configuration (default: WARPP_ENV or dev)')(func)
    func = click.option('--config', 'config_file', type=click.Path(exists=True, dir_okay=False),
                        help='JSON experiment config overriding the environment')(func)
    func = click.option('--seed', type=int, default=None, help='Experiment seed')(func)
    func = click.option('--out', type=click.Path(file_okay=False), default=None,
                        help='Artifact directory')(func)
    return func


def selection_options(func):
    func = click.option('--domains', multiple=True, help='Restrict to a domain (repeatable)')(func)
    func = click.option('--intents', multiple=True, help='Restrict to an intent (repeatable)')(func)
    return func


@click.group()
def cli():
    """WARPP Benchmark CLI - workflow personalization experiments and test automation."""
    pass


@cli.command()
@common_options
@selection_options
@click.option('--profiles', '--n', 'count', type=click.IntRange(min=1), default=None,
              help='Profiles per intent')
@click.option('--mode', '--modes', 'modes', type=click.Choice(MODE_CHOICES), multiple=True,
              help='Modes to record ground truth for (default: all configured)')
def generate(env, config_file, seed, out, domains, intents, count, modes):
    """Generate profiles and ground-truth trajectories."""
    config = load_settings(env, config_file, seed, out)
    if count is not None:
        config.set('datagen.profiles_per_intent', count)
    count = config.get('datagen.profiles_per_intent', 50)
    seed = config.get('datagen.seed', 0)
    root = out_dir(config)
    print_header("Generating Profiles And Ground Truth")

    try:
        engine = build_engine(config)
        meta = artifact_meta(config)
        jobs = []
        for entry in selected_intents(engine.catalog, domains, intents):
            profiles = generate_profiles(entry.schema, count, seed, entry.utterances)
            write_profiles(profiles, root / 'profiles' / f'{entry.name}.json')
            print_success(f"{entry.name}: {len(profiles)} profiles")
            for mode in selected_modes(config, modes):
                for profile in profiles:
                    target = root / 'ground_truth' / mode.value / entry.name / f'{profile.customer_id}.jsonl'

                    def job(profile=profile, mode=mode, target=target):
                        return generate_ground_truth(profile, mode, seed, engine).write(target, meta)

                    jobs.append(job)
        written = run_parallel("Recording ground truth", jobs, config.get('experiment.workers', 1))
    except ENGINE_ERRORS as e:
        fail(e)

    write_manifest(config, root, 'generate')
    print_success(f"{len(written)} ground-truth trajectories written under {root / 'ground_truth'}")


def _audit_meta(engine, profile):
    """Relevance and completeness of the trim a Warpp session works from."""
    entry = engine.catalog.intent(profile.intent, profile.domain)
    client = ClientData.from_record(profile.to_record(), entry.toolset, entry.schema.nullable)
    result = trim(entry.workflow, client, entry.toolset,
                  terminal_tool=engine.config.terminal_tool, max_depth=engine.config.max_branch_depth)
    scores = audit(result.workflow, entry.workflow, client)
    return {'relevance': scores.relevance, 'completeness': scores.completeness}


@cli.command()
@common_options
@selection_options
@click.option('--mode', '--modes', 'modes', type=click.Choice(MODE_CHOICES), multiple=True,
              help='Modes to run (default: all configured)')
@click.option('--virtual-clock/--wall-clock', default=None, help='Clock used for tool latency')
@click.option('--perturb', 'perturbations', multiple=True, metavar='NAME=P',
              help='Adherence error rate, e.g. drop_tool=0.1 (repeatable)')
def run(env, config_file, seed, out, domains, intents, modes, virtual_clock, perturbations):
    """Run sessions for every generated profile."""
    config = load_settings(env, config_file, seed, out, virtual_clock)
    for item in perturbations:
        name, sep, value = item.partition('=')
        if not sep:
            raise click.UsageError(f"--perturb expects NAME=P, got {item}")
        try:
            config.set(f'experiment.perturb.{name}', float(value))
        except ValueError:
            raise click.UsageError(f"--perturb {name} needs a number, got {value}")
    try:
        spec = PerturbSpec.from_dict(config.get('experiment.perturb', {}) or {})
    except ValueError as e:
        raise click.UsageError(str(e))

    seed = config.get('datagen.seed', 0)
    root = out_dir(config)
    try:
        engine = build_engine(config)
    except ENGINE_ERRORS as e:
        fail(e)
    names = {entry.name for entry in selected_intents(engine.catalog, domains, intents)}
    profile_files = [path for path in sorted((root / 'profiles').glob('*.json')) if path.stem in names]
    if not profile_files:
        raise click.UsageError(f"No profiles under {root / 'profiles'}; run 'generate' first")
    print_header("Running Sessions")

    try:
        meta = artifact_meta(config)
        jobs = []
        for profile_file in profile_files:
            for profile in load_profiles(profile_file):
                for mode in selected_modes(config, modes):
                    def job(profile=profile, mode=mode):
                        trajectory = engine.run_session(profile, mode, seed)
                        run_meta = dict(meta)
                        if mode is Mode.WARPP:
                            run_meta['audit'] = _audit_meta(engine, profile)
                        stem = Path(mode.value) / profile.intent / f'{profile.customer_id}.jsonl'
                        trajectory.write(root / 'runs' / stem, run_meta)
                        if not spec.is_identity:
                            noisy = perturb(trajectory, spec, seed + profile.customer_id)
                            noisy.write(root / 'perturbed' / stem, {**run_meta, 'perturb': spec.to_dict()})
                        return trajectory

                    jobs.append(job)
        trajectories = run_parallel("Running sessions", jobs, config.get('experiment.workers', 1))
    except ENGINE_ERRORS as e:
        fail(e)

    write_manifest(config, root, 'run')
    statuses = {}
    for trajectory in trajectories:
        statuses[trajectory.status] = statuses.get(trajectory.status, 0) + 1
    print(tabulate(sorted(statuses.items()), headers=['Status', 'Sessions'], tablefmt='grid'))
    print_success(f"{len(trajectories)} sessions written under {root / 'runs'}")


@cli.command()
@common_options
@selection_options
@click.option('--perturbed', is_flag=True, help='Score the perturbed runs instead of the clean ones')
def report(env, config_file, seed, out, domains, intents, perturbed):
    """Score runs against ground truth and write report.csv / report.json."""
    config = load_settings(env, config_file, seed, out)
    root = out_dir(config)
    source = root / ('perturbed' if perturbed else 'runs')
    try:
        catalog = build_engine(config).catalog
    except ENGINE_ERRORS as e:
        fail(e)
    names = {entry.name for entry in selected_intents(catalog, domains, intents)}
    run_files = [path for path in sorted(source.glob('*/*/*.jsonl')) if path.parent.name in names]
    if not run_files:
        raise click.UsageError(f"No runs under {source}; run 'run' first")
    print_header("Scoring Runs")

    try:
        reports = []
        seeds = set()
        for run_file in run_files:
            relative = run_file.relative_to(source)
            gt_file = root / 'ground_truth' / relative
            if not gt_file.exists():
                raise MissingGroundTruth(str(relative))
            run_meta = read_meta(run_file)
            seeds.update({run_meta.get('seed'), read_meta(gt_file).get('seed')})
            scores = run_meta.get('audit')
            audit_scores = Audit(scores['relevance'], scores['completeness'], []) if scores else None
            reports.append(build_report(Trajectory.read(run_file), Trajectory.read(gt_file), audit_scores))
        if len(seeds) > 1:
            print_error(f"Refusing to aggregate runs from different seeds: {sorted(map(str, seeds))}")
            sys.exit(1)
        check_seeds(reports)
        rows = aggregate(reports)
    except ENGINE_ERRORS + (ValueError,) as e:
        fail(e)

    meta = {**artifact_meta(config), 'seed': seeds.pop(), 'runs': len(reports), 'perturbed': perturbed}
    write_csv(rows, root / 'report.csv')
    write_json(rows, root / 'report.json', meta)
    write_manifest(config, root, 'report')

    shown = ['Intent', 'Strategy', 'Exact Match', 'LCS Tools', 'Tool F1', 'Fulfill Tool F1',
             'Param Match', 'Token Usage', 'Latency']
    table = [[row[column] for column in shown] for row in round_rows(rows)]
    print(tabulate(table, headers=shown, tablefmt='grid'))
    print_success(f"Report written to {root / 'report.csv'} and {root / 'report.json'}")


@cli.command()
@click.option('--env', type=click.Choice(['dev', 'ci']), default=None)
def info(env):
    """Show registered domains, intents and their fixtures."""
    print_header("Project Information")
    config = get_config(env)

    info_data = [
        ['Project', 'WARPP Benchmark'],
        ['Engine Version', ENGINE_VERSION],
        ['Environment', config.environment],
        ['Python Version', f"{sys.version_info.major}.{sys.version_info.minor}.{sys.version_info.micro}"],
        ['Project Root', str(PROJECT_ROOT)],
        ['Artifacts Directory', str(out_dir(config))],
    ]
    print(tabulate(info_data, tablefmt='grid'))

    try:
        catalog = build_engine(config).catalog
    except ENGINE_ERRORS as e:
        fail(e)
    table = [
        [entry.domain, entry.name, entry.workflow.step_count, token_count(entry.workflow),
         len(entry.toolset.info_tools), len(entry.toolset.exec_tools), len(entry.utterances)]
        for entry in catalog.intents()
    ]
    print(f"\n{Fore.CYAN}Intents:{Style.RESET_ALL}")
    print(tabulate(table, headers=['Domain', 'Intent', 'Steps', 'Tokens', 'Info Tools', 'Exec Tools',
                                   'Utterances'], tablefmt='grid'))

    test_files = list(TESTS_DIR.glob('**/*.robot'))
    print(f"\n{Fore.CYAN}Robot Suites:{Style.RESET_ALL} {len(test_files)}")


@cli.command()
@click.option('--suite', type=click.Choice(['all', 'smoke', 'workflow', 'personalizer',
                                            'orchestration', 'datagen', 'metrics']),
              default='smoke', help='Test suite to run')
@click.option('--env', type=click.Choice(['dev', 'ci']), default='dev', help='Environment configuration')
@click.option('--parallel', is_flag=True, help='Run suites in parallel with pabot')
@click.option('--tags', multiple=True, help='Run tests with specific tags')
@click.option('--verbose', is_flag=True, help='Verbose output')
@click.option('--dry-run', is_flag=True, help='Show what would be run without executing')
def suite(suite, env, parallel, tags, verbose, dry_run):
    """Run the Robot Framework acceptance suites."""
    print_header(f"Running {suite.upper()} Suites")

    if suite in ('all', 'smoke'):
        test_paths = [str(TESTS_DIR)]
    else:
        test_paths = [str(TESTS_DIR / suite)]

    timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
    report_dir = REPORTS_DIR / f"{suite}_{timestamp}"

    cmd = ['robot', '--outputdir', str(report_dir), '--pythonpath', str(PROJECT_ROOT)]
    cmd.extend(['--loglevel', 'DEBUG' if verbose else get_config(env).get('logging.level', 'INFO')])
    cmd.extend(['--variable', f'ENV:{env}'])
    if suite == 'smoke':
        cmd.extend(['--include', 'smoke'])
    for tag in tags:
        cmd.extend(['--include', tag])
    cmd.extend(['--name', f'{suite.title()} Suites'])
    cmd.extend(test_paths)

    print_info(f"Command: {' '.join(cmd)}")
    print_info(f"Reports will be saved to: {report_dir}")
    if dry_run:
        print_info("Dry run - not executing suites")
        return

    report_dir.mkdir(parents=True, exist_ok=True)
    try:
        if parallel:
            print_info("Running suites in parallel...")
            cmd[0] = 'pabot'
            cmd.insert(1, '--processes')
            cmd.insert(2, '4')

        result = subprocess.run(cmd, cwd=PROJECT_ROOT)

        if result.returncode == 0:
            print_success("\nAll suites passed!")
        else:
            print_error(f"\nSuites failed with exit code: {result.returncode}")
        print_info(f"\nReports: {report_dir}")
        sys.exit(1 if result.returncode else 0)

    except KeyboardInterrupt:
        print_error("\nSuite execution interrupted")
        sys.exit(1)


if __name__ == '__main__':
    cli()
