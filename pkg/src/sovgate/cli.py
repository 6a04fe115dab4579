"""Command line interface.

Exit codes: 0 success, 2 broken audit chain (verify-log), 64 usage errors,
66 missing/unreadable files, 1 other failures.
"""

import sys
from pathlib import Path

import click

from .audit import AuditLog, completeness_report, reconstruct_trace
from .errors import GatewayError
from .gateway import Gateway
from .report import (
    comparison_grid,
    scorecard_tsv,
    scenario_summary_text,
    write_comparison_report,
    write_scenario_report,
)
from .threatsim import (
    compare_architectures,
    parse_scenario_file,
    run_scenario,
    score_sovereignty,
)

EX_USAGE = 64
EX_NOINPUT = 66
EX_BROKEN_CHAIN = 2


@click.group()
def cli():
    """Decision-sovereignty gateway and supplier-simulation harness."""


@cli.command()
@click.argument("config_path", type=click.Path(dir_okay=False))
@click.option("--host", default=None, help="Override the configured listen host.")
@click.option("--port", default=None, type=int, help="Override the configured listen port.")
def serve(config_path, host, port):
    """Start the gateway HTTP API from a config file."""
    import uvicorn

    from .api import create_app

    gateway = Gateway.from_config_file(config_path)
    listen = getattr(gateway, "config").listen
    cfg_host, _, cfg_port = listen.partition(":")
    uvicorn.run(
        create_app(gateway),
        host=host or cfg_host or "127.0.0.1",
        port=port or int(cfg_port or 8470),
        log_level="info",
    )


@cli.command("run-scenario")
@click.argument("scenario_file", type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", default="reports", show_default=True,
              help="Directory for the audit log, scorecard, and figure.")
def run_scenario_cmd(scenario_file, out_dir):
    """Run one scenario definition file and write its report."""
    scenario = parse_scenario_file(scenario_file)
    report = run_scenario(scenario)
    paths = write_scenario_report(report, out_dir)
    click.echo(scenario_summary_text(report), nl=False)
    for path in paths:
        click.echo(f"wrote {path}")


@cli.command()
@click.argument("suite_dir", type=click.Path(file_okay=False))
@click.option("--out", "out_dir", default="reports", show_default=True)
def compare(suite_dir, out_dir):
    """Run every scenario file in a suite directory and emit the
    eight-dimension architecture comparison."""
    files = sorted(Path(suite_dir).glob("*.scenario"))
    if not files:
        raise click.UsageError(f"no .scenario files in {suite_dir}")
    reports = [run_scenario(parse_scenario_file(f)) for f in files]
    comparison = compare_architectures(reports)
    paths = write_comparison_report(comparison, out_dir)
    click.echo(comparison_grid(comparison), nl=False)
    for path in paths:
        click.echo(f"wrote {path}")


@cli.command("verify-log")
@click.argument("log_path", type=click.Path(dir_okay=False))
@click.pass_context
def verify_log(ctx, log_path):
    """Re-verify an audit log's hash chain. Exit 0 if valid, 2 if broken."""
    verdict = AuditLog.read(log_path).verify_chain()
    click.echo(str(verdict))
    if not verdict.valid:
        ctx.exit(EX_BROKEN_CHAIN)


@cli.command()
@click.argument("task_id")
@click.option("--log", "log_path", required=True, type=click.Path(dir_okay=False))
def trace(task_id, log_path):
    """Reconstruct and print the seven-field decision trace for a task."""
    log = AuditLog.read(log_path)
    record = reconstruct_trace(task_id, log)
    click.echo(f"task: {record.task_id}")
    for name, value in record.field_values().items():
        click.echo(f"  {name}: {value}")
    click.echo(f"  complete: {record.is_complete()}")


@cli.command()
@click.argument("log_path", type=click.Path(dir_okay=False))
@click.option("--out", "out_path", default=None, help="Also write the scorecard TSV here.")
def score(log_path, out_path):
    """Score an audit log on the six sovereignty axes."""
    log = AuditLog.read(log_path)
    scorecard = score_sovereignty(log)
    click.echo(scorecard_tsv(scorecard), nl=False)
    completeness = completeness_report(log)
    click.echo(f"tasks: {completeness.tasks_total} complete: {completeness.tasks_complete_trace}")
    if out_path:
        Path(out_path).write_text(scorecard_tsv(scorecard))
        click.echo(f"wrote {out_path}")


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, standalone_mode=False)
        return rv if isinstance(rv, int) else 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return EX_USAGE
    except FileNotFoundError as exc:
        click.echo(f"file error: {exc}", err=True)
        return EX_NOINPUT
    except OSError as exc:
        click.echo(f"file error: {exc}", err=True)
        return EX_NOINPUT
    except GatewayError as exc:
        click.echo(f"error [{exc.code}]: {exc.message}", err=True)
        return 1
    except click.Abort:
        return 1


if __name__ == "__main__":
    sys.exit(main())
