from typing import NoReturn, Optional, Tuple
import click
from pathlib import Path
import hashlib
import logging
import platform
import sys

from pqstealth import __version__
from pqstealth.cli.ui_helpers import UIHelpers
from pqstealth.core.config import ConfigManager, VIEW_TAG_MODES
from pqstealth.core.errors import (
    ConfigError, KeyFileError, ParameterError, ParamsMismatchError, RegistryError,
    RegistryFormatError, StealthError,
)
from pqstealth.core.selftest import SelfTest, faulty_compress
from pqstealth.lattice.params import PARAM_SETS, ParamSet, get_params
from pqstealth.pipeline.bench import BenchRunner, format_reports
from pqstealth.pipeline.scanner import ScanMatch, Scanner
from pqstealth.sap.keys import (
    export_viewing_key, generate_meta, load_meta, load_viewing_key, save_meta,
    save_recipient_keys, save_viewing_key,
)
from pqstealth.sap.protocol import ViewTagMode, send as sap_send
from pqstealth.storage.registry import RegistryFile
from pqstealth.watchers.watchers import RegistryWatcher

EXIT_FAILURE = 1
EXIT_USAGE = 2

# bad input from the caller rather than a failed check
USAGE_ERRORS = (ParameterError, ParamsMismatchError, ConfigError, KeyFileError, RegistryError)


def env(name: str) -> str:
    return f"PQSTEALTH_{name.upper()}"


def seed_bytes(text: Optional[str]) -> Optional[bytes]:
    """32-byte seed from a user-supplied string (SHA-256 of its UTF-8 bytes)."""
    if text is None:
        return None
    return hashlib.sha256(text.encode("utf-8")).digest()


def match_line(match: ScanMatch) -> str:
    return f"{match.index}\t{match.stealth.hex}"


class PQStealthCLI:
    """pqstealth Command Line Interface."""

    def __init__(self, config_path: Optional[str] = None):
        self.ui = UIHelpers()
        self.config = ConfigManager(config_path)

    def params(self, name: Optional[str]) -> ParamSet:
        return get_params(name or self.config.get("default_paramset"))

    def fail(self, action: str, error: Exception) -> NoReturn:
        """Report an exception and exit with the code its kind maps to."""
        if isinstance(error, RegistryFormatError):
            code = EXIT_FAILURE
        elif isinstance(error, USAGE_ERRORS):
            code = EXIT_USAGE
        else:
            code = EXIT_FAILURE
        if not isinstance(error, StealthError):
            logging.error(f"{action} failed: {error}", exc_info=True)
        self.ui.print_error(f"{action} failed: {error}")
        raise click.exceptions.Exit(code)


@click.group()
@click.option('--config', '-c', type=click.Path(exists=True, dir_okay=False), envvar=env("config"),
              help='Path to a JSON config file')
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose output')
@click.version_option(version=__version__, prog_name="pqstealth")
@click.pass_context
def cli(ctx, config: Optional[str], verbose: bool):
    """pqstealth - post-quantum stealth addresses over MLWE, RLWE and LWE"""
    try:
        cli_instance = PQStealthCLI(config)
        cli_instance.config.validate()
    except ConfigError as e:
        UIHelpers().print_error(str(e))
        raise click.exceptions.Exit(EXIT_USAGE)
    ctx.obj = cli_instance
    cli_instance.config.setup_logging(verbose)


@cli.command()
@click.option('--paramset', '-p', envvar=env("paramset"), help='Parameter set id (see `pqstealth params`)')
@click.option('--seed', envvar=env("seed"), help='Derive the keys deterministically from this string')
@click.option('--out', '-o', 'prefix', required=True, envvar=env("out"), type=click.Path(),
              help='Output prefix: writes PREFIX.meta.json, PREFIX.keys.json, PREFIX.view.json')
@click.pass_obj
def keygen(cli: PQStealthCLI, paramset: Optional[str], seed: Optional[str], prefix: str):
    """Generate a recipient's spend and view key pairs."""
    try:
        params = cli.params(paramset)
        keys, meta = generate_meta(seed_bytes(seed), params)
        paths = {
            "meta": Path(f"{prefix}.meta.json"),
            "keys": Path(f"{prefix}.keys.json"),
            "view": Path(f"{prefix}.view.json"),
        }
        save_meta(meta, paths["meta"])
        save_recipient_keys(keys, paths["keys"])
        save_viewing_key(export_viewing_key(keys), paths["view"])
        for label, path in paths.items():
            click.echo(f"{label}\t{path}")
        cli.ui.print_success(f"Generated {params.name} stealth meta-address")
    except OSError as e:
        cli.fail("Key generation", KeyFileError(str(e)))
    except StealthError as e:
        cli.fail("Key generation", e)


@cli.command()
@click.option('--meta', '-m', 'meta_path', required=True, envvar=env("meta"),
              type=click.Path(dir_okay=False), help='Recipient meta-address file')
@click.option('--registry', '-r', 'registry_path', required=True, envvar=env("registry"),
              type=click.Path(dir_okay=False), help='Registry file (created when absent)')
@click.option('--view-tag', type=click.Choice(VIEW_TAG_MODES), envvar=env("view_tag"),
              help='View tag mode; defaults to the registry\'s or the configured mode')
@click.option('--seed', envvar=env("seed"), help='Derive the ephemeral entropy from this string')
@click.pass_obj
def send(cli: PQStealthCLI, meta_path: str, registry_path: str, view_tag: Optional[str], seed: Optional[str]):
    """Derive a stealth address for a recipient and publish the announcement."""
    try:
        meta = load_meta(meta_path)
        if Path(registry_path).exists():
            registry = RegistryFile.open(registry_path, meta.params)
            if view_tag and ViewTagMode.parse(view_tag) is not registry.vt_mode:
                raise RegistryError(f"registry uses view tag mode {registry.vt_mode.value}, not {view_tag}")
        else:
            mode = ViewTagMode.parse(view_tag or cli.config.get("default_view_tag"))
            registry = RegistryFile.create(registry_path, meta.params, mode)
        announcement, stealth = sap_send(meta, seed_bytes(seed), registry.vt_mode)
        index = registry.publish(announcement)
        click.echo(f"{index}\t{stealth.hex}")
        cli.ui.print_success(f"Announcement {index} published to {registry.path}")
    except OSError as e:
        cli.fail("Send", RegistryError(str(e)))
    except StealthError as e:
        cli.fail("Send", e)


@cli.command()
@click.option('--viewing-key', '-k', 'key_path', required=True, envvar=env("viewing_key"),
              type=click.Path(dir_okay=False), help='Viewing key file')
@click.option('--registry', '-r', 'registry_path', required=True, envvar=env("registry"),
              type=click.Path(dir_okay=False), help='Registry file')
@click.option('--cursor', type=click.IntRange(min=0), default=0, show_default=True, envvar=env("cursor"),
              help='First registry index to scan')
@click.option('--threads', '-t', type=click.IntRange(min=1), envvar=env("threads"),
              help='Scan worker threads')
@click.option('--progress/--no-progress', default=None, help='Show a progress bar')
@click.pass_obj
def scan(cli: PQStealthCLI, key_path: str, registry_path: str, cursor: int, threads: Optional[int],
         progress: Optional[bool]):
    """Scan a registry for announcements addressed to a viewing key."""
    try:
        view_key = load_viewing_key(key_path)
        registry = RegistryFile.open(registry_path, view_key.params)
        announcements = registry.read_since(cursor)
        scanner = Scanner(
            view_key,
            registry.vt_mode,
            threads=threads or cli.config.get("threads"),
            show_progress=cli.config.get("show_progress") if progress is None else progress,
        )
        result = scanner.scan(announcements)
        for match in result.matches:
            click.echo(match_line(match))
        click.echo(f"cursor\t{result.cursor_after if result.cursor_after is not None else cursor}")
        if result.stats.malformed:
            cli.ui.print_warning(f"Skipped malformed announcements: {', '.join(map(str, result.stats.malformed))}")
        cli.ui.print_info(f"{result.stats.scanned} scanned, {result.stats.tag_passes} passed the view tag, "
                          f"{result.stats.matches} matched")
    except StealthError as e:
        cli.fail("Scan", e)


@cli.command()
@click.option('--paramset', '-p', 'paramsets', multiple=True, envvar=env("paramset"),
              help='Parameter set(s) to benchmark')
@click.option('--announcements', '-n', 'sizes', multiple=True, type=click.IntRange(min=1),
              envvar=env("announcements"), help='Registry size(s); defaults to the configured grid')
@click.option('--view-tag', 'view_tags', multiple=True, type=click.Choice(VIEW_TAG_MODES),
              envvar=env("view_tag"), help='View tag mode(s)')
@click.option('--repeats', type=click.IntRange(min=1), envvar=env("repeats"), help='Timed scans per cell')
@click.option('--seed', envvar=env("seed"), help='Seed for keys and registries')
@click.option('--threads', '-t', type=click.IntRange(min=1), envvar=env("threads"), help='Scan worker threads')
@click.option('--format', 'fmt', type=click.Choice(['csv', 'json']), default='csv', show_default=True,
              envvar=env("format"), help='Report format')
@click.option('--output', type=click.Path(dir_okay=False), envvar=env("output"),
              help='Write the report here instead of stdout')
@click.option('--reseed', is_flag=True, envvar=env("reseed"),
              help='Rebuild keys and registry from a fresh derived seed for every repeat')
@click.option('--keep-registry', type=click.Path(file_okay=False), envvar=env("keep_registry"),
              help='Keep the synthesized registries in this directory')
@click.pass_obj
def bench(cli: PQStealthCLI, paramsets: Tuple[str, ...], sizes: Tuple[int, ...], view_tags: Tuple[str, ...],
          repeats: Optional[int], seed: Optional[str], threads: Optional[int], fmt: str, output: Optional[str],
          reseed: bool, keep_registry: Optional[str]):
    """Time registry scans across parameter sets, sizes and view tag modes."""
    try:
        grid = [
            (cli.params(p), n, mode)
            for p in (paramsets or (cli.config.get("default_paramset"),))
            for n in (sizes or cli.config.get("bench.sizes"))
            for mode in (view_tags or (cli.config.get("default_view_tag"),))
        ]
        runner = BenchRunner(
            threads=threads or cli.config.get("threads"),
            warmup=cli.config.get("bench.warmup_announcements"),
            decoy_recipients=cli.config.get("registry.decoy_recipients"),
            keep_dir=Path(keep_registry) if keep_registry else None,
        )
        repeats = repeats or cli.config.get("bench.repeats")
        seed_value = seed_bytes(seed or cli.config.get("bench.seed"))

        reports = []
        with cli.ui.create_progress_bar() as progress:
            task = progress.add_task("Benchmarking...", total=len(grid))
            for params, n, mode in grid:
                progress.update(task, description=f"{params.name} n={n} {mode}")
                reports.append(runner.run(params, n, mode, repeats, seed_value, reseed=reseed))
                progress.advance(task)

        text = format_reports(reports, fmt)
        if output:
            Path(output).write_text(text, encoding="utf-8")
            cli.ui.print_success(f"Report written to {output}")
        else:
            click.echo(text, nl=False)
    except MemoryError:
        cli.fail("Benchmark", StealthError("out of memory; try fewer announcements"))
    except OSError as e:
        cli.fail("Benchmark", RegistryError(str(e)))
    except StealthError as e:
        cli.fail("Benchmark", e)


@cli.command()
@click.option('--paramset', '-p', 'paramsets', multiple=True, help='Limit the KEM checks to these sets')
@click.option('--kem-trials', type=click.IntRange(min=1), help='Round-trips per ring parameter set')
@click.option('--inject-compress-fault', is_flag=True, hidden=True)
@click.pass_obj
def selftest(cli: PQStealthCLI, paramsets: Tuple[str, ...], kem_trials: Optional[int],
             inject_compress_fault: bool):
    """Run the built-in correctness checks."""
    try:
        runner = SelfTest(
            kem_trials=kem_trials or cli.config.get("selftest.kem_trials"),
            lwe_trials=cli.config.get("selftest.lwe_trials"),
            compress_widths=cli.config.get("selftest.compress_widths"),
            paramsets=paramsets or None,
            **({"compress_fn": faulty_compress} if inject_compress_fault else {}),
        )
        report = runner.run()
    except StealthError as e:
        cli.fail("Self-test", e)

    cli.ui.display_table(
        ["Check", "Result", "Time", "Detail"],
        [[c.name, "[green]pass[/green]" if c.passed else "[red]FAIL[/red]", f"{c.seconds:.2f}s", c.detail]
         for c in report.checks],
        title="Self-test",
    )
    for check in report.checks:
        click.echo(f"{check.name}\t{'pass' if check.passed else 'fail'}")
    if not report.passed:
        cli.ui.print_error(f"{len(report.failures)} check(s) failed")
        raise click.exceptions.Exit(EXIT_FAILURE)
    cli.ui.print_success("All checks passed")


@cli.command()
@click.option('--pretty', is_flag=True, help='Render a table instead of tab-separated lines')
@click.pass_obj
def params(cli: PQStealthCLI, pretty: bool):
    """List parameter sets and their key and ciphertext sizes."""
    headers = ["paramset", "variant", "n", "k", "q", "pk_bytes", "sk_bytes", "ct_bytes", "ss_bytes"]
    rows = [
        [p.name, p.variant.value, str(p.n), str(p.k), str(p.q)] + [str(v) for v in p.sizes().values()]
        for p in PARAM_SETS.values()
    ]
    if pretty:
        cli.ui.display_table(headers, rows, title="Parameter sets",
                             justify={h: "right" for h in headers[2:]})
        return
    click.echo("\t".join(headers))
    for row in rows:
        click.echo("\t".join(row))


@cli.command()
@click.option('--viewing-key', '-k', 'key_path', required=True, envvar=env("viewing_key"),
              type=click.Path(dir_okay=False), help='Viewing key file')
@click.option('--registry', '-r', 'registry_path', required=True, envvar=env("registry"),
              type=click.Path(dir_okay=False), help='Registry file')
@click.option('--cursor', type=click.IntRange(min=0), default=0, envvar=env("cursor"),
              help='First registry index to scan')
@click.option('--threads', '-t', type=click.IntRange(min=1), envvar=env("threads"), help='Scan worker threads')
@click.option('--duration', type=click.FloatRange(min=0), hidden=True, help='Stop after this many seconds')
@click.pass_obj
def watch(cli: PQStealthCLI, key_path: str, registry_path: str, cursor: int, threads: Optional[int],
          duration: Optional[float]):
    """Watch a registry and report new matches as announcements arrive."""
    try:
        view_key = load_viewing_key(key_path)
        registry = RegistryFile.open(registry_path, view_key.params)
        watcher = RegistryWatcher(
            registry,
            view_key,
            on_match=lambda m: click.echo(match_line(m)),
            cursor=cursor,
            threads=threads or cli.config.get("threads"),
            debounce_seconds=cli.config.get("watch.debounce_delay"),
        )
        cli.ui.print_info("Watching for announcements (Press Ctrl+C to stop)...")
        try:
            watcher.run(stop_after=duration)
        except KeyboardInterrupt:
            cli.ui.print_info("Stopping registry watcher...")
        click.echo(f"cursor\t{watcher.cursor}")
    except StealthError as e:
        cli.fail("Watch", e)


@cli.command()
@click.option('--export-path', '-e', type=click.Path(dir_okay=False), help='Export configuration to file')
@click.pass_obj
def config(cli: PQStealthCLI, export_path: Optional[str]):
    """Show or export configuration."""
    try:
        if export_path:
            cli.config.export_config(export_path)
            cli.ui.print_success(f"Configuration exported to {export_path}")
            return
        for section, values in cli.config.to_dict().items():
            cli.ui.print_header(section)
            for key, value in values.items():
                cli.ui.console.print(f"{key}: {value}")
    except OSError as e:
        cli.fail("Configuration export", ConfigError(str(e)))


@cli.command()
def version():
    """Show detailed version information"""
    click.echo(f"pqstealth {__version__} (Python {sys.version.split()[0]}, {platform.platform()})")


def main():
    """Main entry point for the CLI."""
    cli(obj=None)


if __name__ == '__main__':
    main()
