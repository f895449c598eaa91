# nphisd/commands/__init__.py
# Package for subcommand modules (search, landscape, convergence, verify, spectrum)
