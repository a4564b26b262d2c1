#!/usr/bin/env python
"""Run the fig3/fig4/fig5 presets into results/<figure>/ and print the checks.

    python scripts/reproduce_all.py [--out results] [--paper-fidelity]
"""
import argparse
import sys

from photon_tow.cli import main

parser = argparse.ArgumentParser()
parser.add_argument("--out", default="results")
parser.add_argument("--paper-fidelity", action="store_true")
parser.add_argument("--figures", default="fig3,fig4,fig5")
args = parser.parse_args()

status = 0
for fig in args.figures.split(","):
    argv = ["reproduce", fig, "--out", f"{args.out}/{fig}"]
    if args.paper_fidelity:
        argv.append("--paper-fidelity")
    status |= main(argv)
sys.exit(status)
