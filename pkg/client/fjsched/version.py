# -*- coding: utf-8 -*-
"""Package declaring fjsched version.

Version is embedded into every report file written by the CLI. Keep it in
sync with `pyproject.toml`.
"""
name = "fjsched"
__version__ = "0.1.0"
