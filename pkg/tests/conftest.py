import os
import sys

from hypothesis import settings

# oracles.py lives next to the tests and is imported by plain name
sys.path.insert(0, os.path.dirname(__file__))

# same examples on every run, so test_output.txt is reproducible
settings.register_profile("repo", derandomize=True, deadline=None)
settings.load_profile("repo")
