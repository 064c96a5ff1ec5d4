"""Командная строка: чтение CSV, команды анализа и отчёты"""
