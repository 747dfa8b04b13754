"""Module entry point so `python -m qwmark` mirrors the console script."""

from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
