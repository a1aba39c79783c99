from __future__ import annotations

from freeclark.cli import app

if __name__ == "__main__":
    # Allow running as: python -m freeclark
    app()
