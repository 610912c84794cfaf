"""Command routers, one per CLI group"""
