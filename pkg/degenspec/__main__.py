from degenspec.cli import cli

cli(prog_name="degenspec")
