"""Capability registry, contract-validated dispatch and the agm command line."""
