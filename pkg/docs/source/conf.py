# Sphinx configuration for the Sturm-Liouville Resolvent Toolkit.

import os
import sys

# Modules in src/ are imported by bare name
sys.path.insert(0, os.path.abspath("../../src"))

project = "Sturm-Liouville Resolvent Toolkit"
copyright = "2026, SRT contributors"
author = "SRT contributors"
release = "0.2"

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx.ext.mathjax",
    "sphinx.ext.viewcode",
    "sphinx.ext.intersphinx",
]

templates_path = []
exclude_patterns = []

html_theme = "sphinx_rtd_theme"
html_static_path = []

# Google-style docstrings only
napoleon_google_docstring = True
napoleon_numpy_docstring = False
napoleon_use_rtype = True

autodoc_default_options = {
    "members": True,
    "member-order": "bysource",
    "undoc-members": True,
}
autodoc_typehints = "description"

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable", None),
    "scipy": ("https://docs.scipy.org/doc/scipy", None),
    "pandas": ("https://pandas.pydata.org/docs", None),
}
