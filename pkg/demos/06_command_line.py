"""The command-line interface, driven from Python.

Each call below is equivalent to running ``latiter ...`` in a shell.

    python demos/06_command_line.py
"""

import os
import tempfile

from latiter.cli import main

here = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")
out = tempfile.mkdtemp(prefix="latiter-")


def run(*argv):
    print("$ latiter", " ".join(argv))
    code = main(list(argv))
    print(f"(exit {code})\n")


run("solve", os.path.join(here, "example1.toml"), "--out-dir", out)
run("verify", os.path.join(out, "f_min.csv"), "--config", os.path.join(here, "example1.toml"))
run("solve", os.path.join(here, "bad_regime.toml"), "--out-dir", out)
run("tarski", os.path.join(here, "diamond.txt"), "--map", os.path.join(here, "swap.txt"))
run("tarski", os.path.join(here, "chain4.txt"), "--map", os.path.join(here, "step_up.txt"))
run("tarski", os.path.join(here, "chain3.txt"), "--all")
run("examples", "--resolution", "33")
print("outputs written to", out)
