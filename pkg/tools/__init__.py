"""
曲率工具包
"""
