"""Allow ``python -m comdet`` to behave like the installed console script."""

from .cli import entry

if __name__ == "__main__":
    entry()
