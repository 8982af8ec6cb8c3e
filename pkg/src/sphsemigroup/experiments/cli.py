"""Command-line entry point: ``sphsemigroup <experiment> [--config FILE] [--out DIR]``.

Exit codes: 0 all verdicts pass, 1 some verdict failed, 2 bad configuration.
"""

import os
import sys

import click

from ..errors import ConfigError
from .config import ENV_OUT, load_config
from .report import write_reports
from .studies import EXPERIMENTS

CSV_HELP = """
Outputs under the output directory (--out, else $SPHSEMIGROUP_OUT, else the
config's "output" key):

\b
  report.json         config echo, verdicts with tolerances, metrics, timings
  <experiment>.csv    series,t,lhs,rhs,ratio  (one row per measurement)
  kernels/*.csv       theta,value  (kernel samples, '#' header with tag, N, tail bound)
"""


def _run(names, config, out):
    try:
        cfg = load_config(config)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    out_dir = out or os.environ.get(ENV_OUT) or cfg["output"]
    reports = []
    for name in names:
        rep = EXPERIMENTS[name](cfg)
        reports.append(rep)
        status = "pass" if rep.passed else "FAIL"
        click.echo(f"{name:<14} {status}  ({len(rep.verdicts)} verdicts, {rep.wall_seconds:.1f} s)")
        for v in rep.failures():
            click.echo(f"  failed {v.criterion}: {v.detail} = {v.value:.3e} (tolerance {v.tolerance:.3e})")
    path = write_reports(reports, out_dir, cfg)
    click.echo(f"report written to {path}")
    sys.exit(0 if all(r.passed for r in reports) else 1)


def _options(fn):
    fn = click.option("--out", "out", type=click.Path(file_okay=False), default=None,
                      help="Output directory.")(fn)
    fn = click.option("--config", "config", type=click.Path(dir_okay=False), default=None,
                      help="JSON config; omitted keys take defaults.")(fn)
    return fn


@click.group(epilog=CSV_HELP)
def main():
    """Numerical checks for exponential-type multiplier semigroups on spheres."""


def _register(name, fn):
    @main.command(name=name, help=fn.__doc__, epilog=CSV_HELP)
    @_options
    def cmd(config, out):
        _run([name], config, out)


for _name, _fn in EXPERIMENTS.items():
    _register(_name, _fn)


@main.command(name="all", epilog=CSV_HELP)
@_options
def run_all(config, out):
    """Run every experiment and write one combined report."""
    _run(list(EXPERIMENTS), config, out)


if __name__ == "__main__":
    main()
