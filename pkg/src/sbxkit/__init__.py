"""sbxkit: assemble, execute, audit and report on assessment sandbox runs."""

__version__ = "0.1.0"
