"""
Main entry point: python -m decarb_speed
"""

from .cli import main

if __name__ == "__main__":
    exit(main())
