"""Application core: command routing, run ledger, errors and numerics"""
