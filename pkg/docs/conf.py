#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# fasloc documentation build configuration file.

import os
import sys
sys.path.insert(0, os.path.abspath('..'))
import fasloc

# -- General configuration ------------------------------------------------

extensions = ['sphinx.ext.autodoc',
              'sphinx.ext.autosummary',
              'sphinx.ext.mathjax',
              'sphinx.ext.viewcode',
              'sphinx.ext.napoleon',
              'matplotlib.sphinxext.plot_directive']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'fasloc'
copyright = '2026, the fasloc developers'
author = 'the fasloc developers'

version = fasloc.__version__
release = fasloc.__version__

language = 'en'
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'
todo_include_todos = False

# Include the __init__ docstring with the class docstring.
autoclass_content = 'both'

# The numpydoc section underlines use "=".
napoleon_numpy_docstring = True
napoleon_google_docstring = False

# -- Options for HTML output ----------------------------------------------

html_theme = 'alabaster'
html_static_path = []
htmlhelp_basename = 'faslocdoc'

# -- Options for LaTeX and manual page output -----------------------------

latex_documents = [
    (master_doc, 'fasloc.tex', 'fasloc Documentation', author, 'manual'),
]

man_pages = [
    (master_doc, 'fasloc', 'fasloc Documentation', [author], 1)
]
