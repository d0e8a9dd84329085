"""Executable-model workbench engine.

Modules:
- ast        : frozen dataclasses for models, tests and refactoring scripts
- model      : well-formedness rules, inheritance lookup and dispatch
- typecheck  : static typing of OCL and the action language
- parser     : lark-based parsing of .agm/.agt/.agr files, name resolution
- printer    : canonical formatter
- ocl        : OCL evaluation over an object space
- space      : object spaces and their canonical serialization
- runtime    : the interpreter (calls, statecharts, traces)
- testkit    : test execution, pattern and trace matching
- lint       : acceptance-test standards
- derive     : statechart-based test derivation
- refactor   : refactoring catalog, context conditions, co-transformation
- invariance : before/after observation comparison
- config     : settings from agm.yaml, .env and the environment
"""
