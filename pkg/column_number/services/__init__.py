"""Side services: the run ledger and report charts."""
