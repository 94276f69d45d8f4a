# -*- coding: utf-8 -*-
#
# stencilforge documentation build configuration file.
#
# Only the settings that differ from the sphinx-quickstart defaults are kept.

import sys
import os

# Make the package importable without installing it.
sys.path.insert(0, os.path.abspath('..'))

from stencilforge.version import __version__  # noqa: E402

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.doctest',
    'sphinx.ext.todo',
    'sphinx.ext.coverage',
    'sphinx.ext.viewcode',
]

templates_path = ['_templates']

source_suffix = '.rst'

master_doc = 'index'

project = u'stencilforge'
copyright = u'2026, stencilforge developers'
author = u'stencilforge developers'

# The short X.Y version.
version = '.'.join(__version__.split('.')[:2])
# The full version, including alpha/beta/rc tags.
release = __version__

language = None

exclude_patterns = ['_build']

pygments_style = 'sphinx'

todo_include_todos = False

# Doctests run every snippet on a registry of their own.
doctest_global_setup = '''
import numpy as np
from stencilforge import SymbolRegistry
registry = SymbolRegistry()
'''

# -- Options for HTML output ----------------------------------------------

html_theme = 'sphinx_rtd_theme'

htmlhelp_basename = 'stencilforgedoc'

# -- Options for LaTeX output ---------------------------------------------

latex_elements = {
}

latex_documents = [
    (master_doc, 'stencilforge.tex', u'stencilforge Documentation',
     author, 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    (master_doc, 'stencilforge', u'stencilforge Documentation',
     [author], 1)
]

# -- Options for Texinfo output -------------------------------------------

texinfo_documents = [
    (master_doc, 'stencilforge', u'stencilforge Documentation',
     author, 'stencilforge',
     'Symbolic finite-difference stencils compiled to C kernels.',
     'Miscellaneous'),
]
