"""
Тесты для AI Summariser
""" 