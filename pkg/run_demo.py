#!/usr/bin/env python3
"""
Quick demo script to run QMirror on the bundled samples.
Validates the sample targets, then runs the full verification suite.
"""

import subprocess
import sys
from pathlib import Path


def main():
    samples = [Path("samples/p2.json"), Path("samples/p4_quintic.json")]
    for sample in samples:
        if not sample.exists():
            print(f"Error: sample target not found at {sample}")
            sys.exit(1)

    commands = [[sys.executable, "-m", "src.cli", "validate", "--target", str(s)] for s in samples]
    commands.append([sys.executable, "-m", "src.cli", "verify", "--suite", "all"])

    try:
        for cmd in commands:
            subprocess.run(cmd, check=True)
    except subprocess.CalledProcessError as e:
        sys.exit(e.returncode)
    except KeyboardInterrupt:
        print("\n\nInterrupted by user")
        sys.exit(130)


if __name__ == "__main__":
    main()
